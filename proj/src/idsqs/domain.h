// Copyright 2026 The IDSQS Authors. All Rights Reserved.
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

// Study entities (stimuli, questions, batches, ratings), the line-delimited
// rating table format and the declarative study configuration.
//
// Rating table files are JSON Lines. Each line is an object with a "record"
// discriminator:
//
//   {"record":"question","question_id":"q0001","kind":"STUDY",
//    "source_id":"src02","codec":"AVIF","distortion_level":4}
//   {"record":"batch","batch_id":"b1","question_ids":["q0001",...]}
//   {"record":"rating","subject_id":"w17","batch_instance_id":"w17-b1",
//    "batch_id":"b1","question_id":"q0001","score":35.5,"toggle_count":6,
//    "elapsed_ms":8123,"timestamp":1760000000000}
//
// Question and batch records make a file self-contained; when absent they
// are taken from a study configuration passed to LoadRatings.

#ifndef IDSQS_DOMAIN_H_
#define IDSQS_DOMAIN_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace idsqs {

enum class Codec { kJpeg, kJpeg2000, kAvif, kVvcIntra, kJpegXl, kNone };

std::string_view CodecName(Codec codec);
std::optional<Codec> ParseCodec(std::string_view name);

inline constexpr int kMaxDistortionLevel = 10;
inline constexpr double kMinScore = 0.0;
inline constexpr double kMaxScore = 100.0;

struct Stimulus {
  std::string source_id;
  Codec codec = Codec::kNone;
  int distortion_level = 0;

  static Stimulus Pristine(std::string source_id) {
    return Stimulus{std::move(source_id), Codec::kNone, 0};
  }

  bool IsPristine() const { return distortion_level == 0; }

  // `{source_id}_{codec}_{level}.png`
  std::string AssetFileName() const;
  std::string Key() const;  // `{source_id}/{codec}/{level}`

  auto operator<=>(const Stimulus&) const = default;
};

// Throws kInvalidArgument when the level is outside [0, 10] or level and
// codec disagree about pristineness.
void ValidateStimulus(const Stimulus& stimulus);

enum class QuestionKind { kStudy, kTrapI, kTrapII };

std::string_view QuestionKindName(QuestionKind kind);
std::optional<QuestionKind> ParseQuestionKind(std::string_view name);
inline bool IsTrap(QuestionKind kind) { return kind != QuestionKind::kStudy; }

struct Question {
  std::string question_id;
  QuestionKind kind = QuestionKind::kStudy;
  Stimulus reference;
  Stimulus test;
};

Question MakeQuestion(std::string question_id, QuestionKind kind,
                      Stimulus test);
void ValidateQuestion(const Question& question);

struct BatchDef {
  std::string batch_id;
  std::vector<std::string> question_ids;
};

struct Rating {
  std::string subject_id;
  std::string batch_instance_id;
  std::string batch_id;
  std::string question_id;
  double score = 0.0;
  int64_t toggle_count = 0;
  int64_t elapsed_ms = 0;
  int64_t timestamp = 0;  // ms since the Unix epoch
};

struct BatchInstance {
  std::string batch_instance_id;
  std::string subject_id;
  std::string batch_id;
  std::vector<size_t> ratings;  // indices into RatingTable::ratings
  int64_t completed_at = 0;     // latest rating timestamp
};

using IdSet = std::set<std::string>;

// Flat (subject, question, score) collection with cross-references resolved.
// Construct through Build(), which enforces the reference invariants.
struct RatingTable {
  std::vector<Rating> ratings;
  std::map<std::string, Question> questions;
  std::map<std::string, BatchDef> batches;
  std::map<std::string, BatchInstance> instances;

  // Validates every rating (score range, question and batch references,
  // one rating per question per instance) and derives `instances`.
  static RatingTable Build(std::map<std::string, Question> questions,
                           std::map<std::string, BatchDef> batches,
                           std::vector<Rating> ratings);

  // Ratings of the given instances only; questions and batches are kept.
  RatingTable Restrict(const IdSet& instance_ids) const;

  IdSet InstanceIds() const;
  IdSet SubjectIds() const;

  // True when the instance rated every question of its BatchDef.
  bool IsComplete(const BatchInstance& instance) const;
};

struct StudyConfig;

// Reads a rating table file. Question/batch records found in the file take
// precedence; `config` supplies any that are missing.
RatingTable LoadRatings(const std::filesystem::path& path,
                        const StudyConfig* config = nullptr);
RatingTable ReadRatings(std::istream& in, const StudyConfig* config = nullptr);

// Writes question, batch and rating records with normalized key order.
void SaveRatings(const RatingTable& table, const std::filesystem::path& path);
void WriteRatings(const RatingTable& table, std::ostream& out);

struct BatchRules {
  int study_questions = 79;
  int trap_i = 5;
  int trap_ii = 5;
};

struct AcuityPlate {
  std::string plate_id;
  std::string image;  // file name under the asset directory
  std::string answer;
};

struct TrainingItem {
  std::string item_id;
  Stimulus reference;
  Stimulus test;
  double expected_lo = 0.0;
  double expected_hi = 100.0;
  bool easy = true;
};

struct SessionRules {
  int min_width = 1920;
  int min_height = 1080;
  int break_seconds = 180;
  int batches_per_session = 2;
  std::vector<AcuityPlate> acuity_plates;
  std::vector<TrainingItem> training;
};

struct StudyConfig {
  std::string study_id = "idsqs";
  std::string asset_dir = "assets";
  std::vector<std::string> sources;
  std::vector<Codec> codecs;
  std::vector<int> levels;
  std::map<std::string, Question> questions;
  std::vector<BatchDef> batches;
  BatchRules rules;
  SessionRules session;

  const BatchDef* FindBatch(std::string_view batch_id) const;
};

StudyConfig ParseStudyConfig(std::string_view json_text);
std::string SerializeStudyConfig(const StudyConfig& config);
StudyConfig LoadStudyConfig(const std::filesystem::path& path);
void SaveStudyConfig(const StudyConfig& config,
                     const std::filesystem::path& path);

struct DefaultConfigOptions {
  std::vector<std::string> sources = {"src02", "src06", "src07", "src09",
                                      "src10"};
  std::vector<Codec> codecs = {Codec::kJpeg, Codec::kJpeg2000, Codec::kAvif,
                               Codec::kVvcIntra, Codec::kJpegXl};
  int levels = 10;
  int batches = 4;
  BatchRules rules;
};

// Deals every distorted stimulus into the batches at least once (topping
// batches up with repeats), adds one trap of each required type per source
// in round-robin, and assigns opaque question ids in shuffled order.
StudyConfig GenerateDefaultConfig(uint64_t seed,
                                  const DefaultConfigOptions& options = {});

enum class ViolationKind {
  kMissingTraps,
  kTrapCount,
  kStudyCount,
  kMissingAsset,
  kDanglingQuestion,
  kInvalidQuestion,
  kDuplicateQuestionInBatch,
  kEmptyBatch,
};

std::string_view ViolationKindName(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string subject;  // batch id, question id or asset path
  std::string detail;
};

struct ValidationOptions {
  bool check_assets = true;
  // Relative asset directories resolve against this path.
  std::filesystem::path base_dir = ".";
};

std::vector<Violation> ValidateStudyConfig(
    const StudyConfig& config, const ValidationOptions& options = {});

}  // namespace idsqs

#endif  // IDSQS_DOMAIN_H_
