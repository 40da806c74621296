// Copyright 2026 The hti Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hti/transcript.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hti/error.hpp"

namespace hti {
namespace {

using nlohmann::json;

template <typename T, typename F>
T parse_enum(const json& field, F from_string, const char* what) {
  const auto parsed = from_string(field.get<std::string>());
  if (!parsed) throw Error(ErrorCode::kMalformedInput, std::string("bad ") + what);
  return *parsed;
}

}  // namespace

std::string serialize_transcript(const Transcript& t, bool include_timing) {
  std::ostringstream out;
  const auto emit = [&](const json& record) { out << record.dump() << '\n'; };

  emit({{"record", "header"},
        {"episode_id", t.episode_id},
        {"tau", t.tau},
        {"seed", t.seed},
        {"gallery", t.gallery},
        {"target_position", t.target_position},
        {"pool_size", t.pool_size},
        {"agent", t.agent},
        {"budget", t.budget},
        {"noise_mode", to_string(t.noise_mode)}});
  for (std::size_t b = 0; b < t.upload_batches.size(); ++b) {
    emit({{"record", "upload"}, {"batch_index", b}, {"size", t.upload_batches[b]}});
  }
  for (const PrematureOutput& p : t.premature_outputs) {
    emit({{"record", "premature"}, {"after_batch", p.after_batch}, {"text", p.text}, {"kind", to_string(p.kind)}});
  }
  std::size_t previous_size = t.gallery.size();
  for (const TurnRecord& turn : t.turns) {
    // The elimination trace rides along; parsing recomputes nothing from it.
    const long eliminated = static_cast<long>(previous_size) - static_cast<long>(turn.feasible_size_after);
    const bool informative = turn.verdict == Answer::kYes || turn.verdict == Answer::kNo;
    previous_size = turn.feasible_size_after;
    json r = {{"record", "turn"},
              {"turn_index", turn.turn_index},
              {"action", turn.action_kind},
              {"raw", turn.raw},
              {"value_id", turn.value_id ? json(*turn.value_id) : json(nullptr)},
              {"referenced", turn.referenced},
              {"classification", turn.violation ? to_string(*turn.violation) : "valid"},
              {"verdict", to_string(turn.verdict)},
              {"feasible_size_after", turn.feasible_size_after},
              {"contradiction_mode", turn.contradiction_mode},
              {"contradiction_raised",
               turn.contradiction_raised ? json(to_string(*turn.contradiction_raised)) : json(nullptr)},
              {"superseded", turn.superseded},
              {"eliminated", eliminated},
              {"stall", informative && eliminated == 0}};
    if (include_timing) r["elapsed_us"] = turn.elapsed_us;
    emit(r);
  }
  if (t.guess) {
    const GuessRecord& g = *t.guess;
    json r = {{"record", "guess"},
              {"raw", g.raw},
              {"index", g.index},
              {"feasible_size", g.feasible_size},
              {"feasible_members", g.feasible_members},
              {"premature", g.premature},
              {"forced", g.forced},
              {"after_budget", g.after_budget}};
    if (include_timing) r["elapsed_us"] = g.elapsed_us;
    emit(r);
  }
  for (const NoiseEvent& n : t.noise_log) {
    emit({{"record", "noise"},
          {"turn_index", n.turn_index},
          {"original", to_string(n.original)},
          {"emitted", to_string(n.emitted)}});
  }
  emit({{"record", "end"},
        {"abort_kind", t.abort_kind ? json(*t.abort_kind) : json(nullptr)},
        {"abort_message", t.abort_message}});
  return out.str();
}

Transcript parse_transcript(std::string_view text) {
  Transcript t;
  bool have_header = false;
  bool have_end = false;
  std::size_t start = 0;
  try {
    while (start < text.size()) {
      std::size_t stop = text.find('\n', start);
      if (stop == std::string_view::npos) stop = text.size();
      const std::string_view line = text.substr(start, stop - start);
      start = stop + 1;
      if (line.empty()) continue;
      const json r = json::parse(line);
      const std::string kind = r.at("record").get<std::string>();
      if (kind == "header") {
        t.episode_id = r.at("episode_id").get<std::string>();
        t.tau = r.at("tau").get<double>();
        t.seed = r.at("seed").get<std::uint64_t>();
        t.gallery = r.at("gallery").get<std::vector<std::string>>();
        t.target_position = r.at("target_position").get<std::size_t>();
        t.pool_size = r.at("pool_size").get<std::size_t>();
        t.agent = r.at("agent").get<std::string>();
        t.budget = r.at("budget").get<int>();
        t.noise_mode = parse_enum<NoiseMode>(r.at("noise_mode"), noise_mode_from_string, "noise_mode");
        have_header = true;
      } else if (kind == "upload") {
        t.upload_batches.push_back(r.at("size").get<std::size_t>());
      } else if (kind == "premature") {
        t.premature_outputs.push_back({r.at("after_batch").get<int>(), r.at("text").get<std::string>(),
                                       parse_enum<ViolationKind>(r.at("kind"), violation_from_string, "kind")});
      } else if (kind == "turn") {
        TurnRecord turn;
        turn.turn_index = r.at("turn_index").get<int>();
        turn.action_kind = r.at("action").get<std::string>();
        turn.raw = r.at("raw").get<std::string>();
        if (!r.at("value_id").is_null()) turn.value_id = r.at("value_id").get<std::string>();
        turn.referenced = r.at("referenced").get<std::vector<std::string>>();
        const std::string classification = r.at("classification").get<std::string>();
        if (classification != "valid") {
          turn.violation = parse_enum<ViolationKind>(r.at("classification"), violation_from_string, "classification");
        }
        turn.verdict = parse_enum<Answer>(r.at("verdict"), answer_from_string, "verdict");
        turn.feasible_size_after = r.at("feasible_size_after").get<std::size_t>();
        turn.contradiction_mode = r.at("contradiction_mode").get<bool>();
        if (!r.at("contradiction_raised").is_null()) {
          turn.contradiction_raised = parse_enum<ContradictionCause>(
              r.at("contradiction_raised"), contradiction_cause_from_string, "contradiction_raised");
        }
        turn.superseded = r.at("superseded").get<bool>();
        turn.elapsed_us = r.value("elapsed_us", std::int64_t{0});
        t.turns.push_back(std::move(turn));
      } else if (kind == "guess") {
        GuessRecord g;
        g.raw = r.at("raw").get<std::string>();
        g.index = r.at("index").get<int>();
        g.feasible_size = r.at("feasible_size").get<std::size_t>();
        g.feasible_members = r.at("feasible_members").get<std::vector<std::string>>();
        g.premature = r.at("premature").get<bool>();
        g.forced = r.at("forced").get<bool>();
        g.after_budget = r.at("after_budget").get<bool>();
        g.elapsed_us = r.value("elapsed_us", std::int64_t{0});
        t.guess = std::move(g);
      } else if (kind == "noise") {
        t.noise_log.push_back({r.at("turn_index").get<int>(),
                               parse_enum<Answer>(r.at("original"), answer_from_string, "original"),
                               parse_enum<Answer>(r.at("emitted"), answer_from_string, "emitted")});
      } else if (kind == "end") {
        if (!r.at("abort_kind").is_null()) t.abort_kind = r.at("abort_kind").get<std::string>();
        t.abort_message = r.at("abort_message").get<std::string>();
        have_end = true;
      } else {
        throw Error(ErrorCode::kMalformedInput, "unknown record kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, e.what());
  }
  if (!have_header || !have_end) {
    throw Error(ErrorCode::kMalformedInput, "transcript needs a header and an end record");
  }
  if (t.target_position < 1 || t.target_position > t.gallery.size()) {
    throw Error(ErrorCode::kMalformedInput, "target_position out of range");
  }
  return t;
}

Transcript load_transcript_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open transcript '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_transcript(buffer.str());
}

std::string render_transcript(const Transcript& t) {
  std::ostringstream out;
  out << "Episode " << t.episode_id << "  (tau=" << t.tau << ", " << t.gallery.size()
      << " candidates, agent=" << t.agent << ", noise=" << to_string(t.noise_mode) << ")\n";
  out << "Hidden target: #" << t.target_position << " (" << t.target_id() << ")\n\n";
  for (std::size_t b = 0; b < t.upload_batches.size(); ++b) {
    const bool last = b + 1 == t.upload_batches.size();
    out << "      User   " << (last ? "End of uploading " : "Here is the next batch of dress options. ")
        << "<image_batch_" << (b + 1) << ": " << t.upload_batches[b] << " items>\n";
    for (const PrematureOutput& p : t.premature_outputs) {
      if (p.after_batch == static_cast<int>(b)) out << "  !   Model  " << p.text << "   [premature]\n";
    }
  }
  for (const TurnRecord& turn : t.turns) {
    out << (turn.verdict == Answer::kSkip ? "  ! " : "    ");
    out.width(2);
    out << turn.turn_index << " Model  " << turn.raw << "\n";
    out << "      User   ";
    switch (turn.verdict) {
      case Answer::kYes: out << "Yes"; break;
      case Answer::kNo: out << "No"; break;
      case Answer::kUnsure: out << "Unsure"; break;
      case Answer::kSkip: out << "Skip  (" << to_string(*turn.violation) << ")"; break;
    }
    out << "   [feasible: " << turn.feasible_size_after;
    if (turn.contradiction_raised) out << ", contradiction: " << to_string(*turn.contradiction_raised);
    out << "]\n";
  }
  out << "\n";
  if (t.guess) {
    const bool correct = t.guess->index == static_cast<int>(t.target_position);
    out << "      Model  " << t.guess->raw << "   (" << (correct ? "correct" : "incorrect")
        << ", feasible " << t.guess->feasible_size << (t.guess->premature ? ", premature" : "")
        << (t.guess->forced ? ", forced" : "") << ")\n";
  } else if (t.abort_kind) {
    out << "      Aborted: " << *t.abort_kind << " - " << t.abort_message << "\n";
  } else {
    out << "      No guess made, " << t.budget << "-question budget exhausted\n";
  }
  for (const NoiseEvent& n : t.noise_log) {
    out << "      Noise: turn " << n.turn_index << " " << to_string(n.original) << " -> "
        << to_string(n.emitted) << "\n";
  }
  return out.str();
}

}  // namespace hti
