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

// The persisted record of one episode. Everything scoring needs lives here so
// that metrics never touch live engine state.
//
// On disk a transcript is newline-delimited JSON, one record per line, each
// with a "record" discriminator:
//
//   header     episode identity, gallery, target, agent, budget, noise mode
//   upload     one per batch: {batch_index, size}
//   premature  an agent output emitted before "End of uploading"
//   turn       one per question turn (Skip turns included)
//   guess      the terminal guess, if any
//   noise      one per applied noise rewrite
//   end        outcome-relevant closing data (abort reason, if any)

#ifndef HTI_TRANSCRIPT_HPP_
#define HTI_TRANSCRIPT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hti/oracle.hpp"
#include "hti/protocol.hpp"
#include "hti/verification.hpp"

namespace hti {

struct TurnRecord {
  int turn_index = 0;
  /// "ask_value", "ask_text" or "ack" (an acknowledgement sent during play).
  std::string action_kind;
  std::string raw;
  std::optional<std::string> value_id;
  std::vector<std::string> referenced;
  /// nullopt when the question was classified Valid.
  std::optional<ViolationKind> violation;
  Answer verdict = Answer::kSkip;
  std::size_t feasible_size_after = 0;
  bool contradiction_mode = false;
  std::optional<ContradictionCause> contradiction_raised;
  bool superseded = false;
  std::int64_t elapsed_us = 0;
};

struct PrematureOutput {
  /// 0-based index of the batch the output followed.
  int after_batch = 0;
  std::string text;
  ViolationKind kind = ViolationKind::kPrematureQuestion;
};

struct GuessRecord {
  std::string raw;
  int index = 0;
  std::size_t feasible_size = 0;
  /// Feasible members (gallery ids) immediately before the guess.
  std::vector<std::string> feasible_members;
  bool premature = false;
  bool forced = false;
  bool after_budget = false;
  std::int64_t elapsed_us = 0;
};

struct Transcript {
  std::string episode_id;
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> gallery;
  std::size_t target_position = 1;
  std::size_t pool_size = 0;
  std::string agent;
  int budget = 20;
  NoiseMode noise_mode = NoiseMode::kNone;

  std::vector<std::size_t> upload_batches;
  std::vector<PrematureOutput> premature_outputs;
  std::vector<TurnRecord> turns;
  std::optional<GuessRecord> guess;
  std::vector<NoiseEvent> noise_log;
  /// "agent_protocol_error" or "timeout" when the episode was aborted.
  std::optional<std::string> abort_kind;
  std::string abort_message;

  const std::string& target_id() const { return gallery.at(target_position - 1); }
};

/// JSONL rendering. With include_timing=false the elapsed_us fields are
/// omitted, which is the form used for determinism comparisons.
std::string serialize_transcript(const Transcript& transcript, bool include_timing = true);

/// Throws kMalformedInput.
Transcript parse_transcript(std::string_view text);
Transcript load_transcript_file(const std::filesystem::path& path);

/// Plain-text rendering in dialogue order for humans.
std::string render_transcript(const Transcript& transcript);

}  // namespace hti

#endif  // HTI_TRANSCRIPT_HPP_
