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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hti/error.hpp"

namespace hti {
namespace {

Transcript sample() {
  Transcript t;
  t.episode_id = "ep_7";
  t.tau = 0.6;
  t.seed = 18446744073709551557ULL;
  t.gallery = {"a", "b", "c", "d"};
  t.target_position = 3;
  t.pool_size = 9;
  t.agent = "verifier";
  t.budget = 6;
  t.noise_mode = NoiseMode::kFlipOne;
  t.upload_batches = {2, 2};
  t.premature_outputs = {{0, "Is it red?", ViolationKind::kPrematureQuestion}};
  TurnRecord valid{1, "ask_value", "Does it have \"sleeves\"?", "sleeves", {"sleeves"}, std::nullopt,
                   Answer::kNo, 2, false, std::nullopt, false, 1500};
  TurnRecord skip{2, "ask_text", "Is it #2?", std::nullopt, {}, ViolationKind::kIndexReference,
                  Answer::kSkip, 2, false, std::nullopt, false, 40};
  TurnRecord conflict{3, "ask_value", "Sleeves?", "sleeves", {"sleeves"}, std::nullopt,
                      Answer::kYes, 3, true, ContradictionCause::kDirectConflict, true, 7};
  t.turns = {valid, skip, conflict};
  t.guess = GuessRecord{"My guess: #3.", 3, 3, {"a", "c", "d"}, false, false, false, 99};
  t.noise_log = {{1, Answer::kYes, Answer::kNo}};
  return t;
}

TEST(TranscriptTest, RoundTripIsByteStable) {
  const std::string text = serialize_transcript(sample());
  const Transcript back = parse_transcript(text);
  EXPECT_EQ(serialize_transcript(back), text);
  EXPECT_EQ(back.seed, 18446744073709551557ULL);
  EXPECT_EQ(back.target_id(), "c");
  ASSERT_EQ(back.turns.size(), 3u);
  EXPECT_EQ(back.turns[0].raw, "Does it have \"sleeves\"?");
  EXPECT_EQ(back.turns[0].violation, std::nullopt);
  EXPECT_EQ(back.turns[1].violation, ViolationKind::kIndexReference);
  EXPECT_EQ(back.turns[2].contradiction_raised, ContradictionCause::kDirectConflict);
  EXPECT_TRUE(back.turns[2].superseded);
  EXPECT_EQ(back.turns[2].elapsed_us, 7);
  ASSERT_TRUE(back.guess);
  EXPECT_EQ(back.guess->feasible_members, (std::vector<std::string>{"a", "c", "d"}));
  EXPECT_EQ(back.noise_log, sample().noise_log);
  EXPECT_EQ(back.premature_outputs.size(), 1u);
  EXPECT_FALSE(back.abort_kind);
}

TEST(TranscriptTest, TimingCanBeOmitted) {
  const std::string text = serialize_transcript(sample(), false);
  EXPECT_EQ(text.find("elapsed_us"), std::string::npos);
  const Transcript back = parse_transcript(text);
  EXPECT_EQ(back.turns[0].elapsed_us, 0);
  EXPECT_EQ(serialize_transcript(back, false), text);
}

TEST(TranscriptTest, AbortRoundTrips) {
  Transcript t = sample();
  t.guess.reset();
  t.abort_kind = "timeout";
  t.abort_message = "no reply in 120 s";
  const Transcript back = parse_transcript(serialize_transcript(t));
  EXPECT_EQ(back.abort_kind, "timeout");
  EXPECT_EQ(back.abort_message, "no reply in 120 s");
  EXPECT_FALSE(back.guess);
}

void expect_malformed(const std::string& text) {
  try {
    parse_transcript(text);
    ADD_FAILURE() << "accepted: " << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedInput) << text;
  }
}

TEST(TranscriptTest, RejectsBrokenInput) {
  const std::string good = serialize_transcript(sample());
  const std::size_t first_newline = good.find('\n');
  const std::size_t last_record = good.rfind('\n', good.size() - 2);
  expect_malformed("");
  expect_malformed("{not json}\n");
  expect_malformed(good.substr(first_newline + 1));  // no header
  expect_malformed(good.substr(0, last_record + 1));  // no end
  expect_malformed(good + "{\"record\":\"mystery\"}\n");
  std::string bad_enum = good;
  bad_enum.replace(bad_enum.find("\"flip_one\""), 10, "\"flip_two\"");
  expect_malformed(bad_enum);
  std::string bad_target = good;
  bad_target.replace(bad_target.find("\"target_position\":3"), 19, "\"target_position\":9");
  expect_malformed(bad_target);
}

TEST(TranscriptTest, LoadsFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "hti_transcript_test.jsonl";
  std::ofstream(path) << serialize_transcript(sample());
  EXPECT_EQ(load_transcript_file(path).episode_id, "ep_7");
  std::filesystem::remove(path);
  try {
    load_transcript_file(path);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(TranscriptTest, RenderShowsTheDialogue) {
  const std::string text = render_transcript(sample());
  EXPECT_NE(text.find("Hidden target: #3 (c)"), std::string::npos);
  EXPECT_NE(text.find("Is it red?   [premature]"), std::string::npos);
  EXPECT_NE(text.find("Skip  (index_reference)"), std::string::npos);
  EXPECT_NE(text.find("contradiction: direct_conflict"), std::string::npos);
  EXPECT_NE(text.find("My guess: #3.   (correct, feasible 3)"), std::string::npos);
}

}  // namespace
}  // namespace hti
