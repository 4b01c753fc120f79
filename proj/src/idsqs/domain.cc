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

#include "idsqs/domain.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "idsqs/error.h"
#include "idsqs/random.h"
#include "json.hpp"

namespace idsqs {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Codec, std::string_view>, 6> kCodecNames = {{
    {Codec::kJpeg, "JPEG"},
    {Codec::kJpeg2000, "JPEG2000"},
    {Codec::kAvif, "AVIF"},
    {Codec::kVvcIntra, "VVC_INTRA"},
    {Codec::kJpegXl, "JPEGXL"},
    {Codec::kNone, "NONE"},
}};

constexpr std::array<std::pair<QuestionKind, std::string_view>, 3>
    kKindNames = {{
        {QuestionKind::kStudy, "STUDY"},
        {QuestionKind::kTrapI, "TRAP_I"},
        {QuestionKind::kTrapII, "TRAP_II"},
    }};

std::string LineError(size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

// Reads a required field, mapping any type mismatch to kMalformedRecord.
template <typename T>
T Field(const json& j, const char* key, size_t line) {
  auto it = j.find(key);
  if (it == j.end()) {
    Fail(ErrorCode::kMalformedRecord,
         LineError(line, std::string("missing field '") + key + "'"));
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    Fail(ErrorCode::kMalformedRecord,
         LineError(line, std::string("bad type for field '") + key + "'"));
  }
}

Stimulus StimulusFromJson(const json& j, size_t line) {
  Stimulus s;
  s.source_id = Field<std::string>(j, "source_id", line);
  const auto codec_name = Field<std::string>(j, "codec", line);
  auto codec = ParseCodec(codec_name);
  if (!codec) {
    Fail(ErrorCode::kMalformedRecord,
         LineError(line, "unknown codec '" + codec_name + "'"));
  }
  s.codec = *codec;
  s.distortion_level = Field<int>(j, "distortion_level", line);
  return s;
}

void StimulusToJson(const Stimulus& s, json& j) {
  j["source_id"] = s.source_id;
  j["codec"] = std::string(CodecName(s.codec));
  j["distortion_level"] = s.distortion_level;
}

Question QuestionFromJson(const json& j, size_t line) {
  const auto kind_name = Field<std::string>(j, "kind", line);
  auto kind = ParseQuestionKind(kind_name);
  if (!kind) {
    Fail(ErrorCode::kMalformedRecord,
         LineError(line, "unknown question kind '" + kind_name + "'"));
  }
  Question q = MakeQuestion(Field<std::string>(j, "question_id", line), *kind,
                            StimulusFromJson(j, line));
  try {
    ValidateQuestion(q);
  } catch (const Error& e) {
    Fail(ErrorCode::kMalformedRecord, LineError(line, e.what()));
  }
  return q;
}

json QuestionToJson(const Question& q) {
  json j;
  j["question_id"] = q.question_id;
  j["kind"] = std::string(QuestionKindName(q.kind));
  StimulusToJson(q.test, j);
  return j;
}

BatchDef BatchFromJson(const json& j, size_t line) {
  return BatchDef{Field<std::string>(j, "batch_id", line),
                  Field<std::vector<std::string>>(j, "question_ids", line)};
}

json BatchToJson(const BatchDef& b) {
  return json{{"batch_id", b.batch_id}, {"question_ids", b.question_ids}};
}

void CheckScore(double score, const std::string& where) {
  if (!(score >= kMinScore && score <= kMaxScore)) {
    std::ostringstream os;
    os << where << "score " << score << " outside [0, 100]";
    Fail(ErrorCode::kScoreOutOfRange, os.str());
  }
}

}  // namespace

std::string_view CodecName(Codec codec) {
  for (const auto& [c, name] : kCodecNames) {
    if (c == codec) return name;
  }
  return "NONE";
}

std::optional<Codec> ParseCodec(std::string_view name) {
  for (const auto& [c, n] : kCodecNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

std::string_view QuestionKindName(QuestionKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "STUDY";
}

std::optional<QuestionKind> ParseQuestionKind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string Stimulus::AssetFileName() const {
  return source_id + "_" + std::string(CodecName(codec)) + "_" +
         std::to_string(distortion_level) + ".png";
}

std::string Stimulus::Key() const {
  return source_id + "/" + std::string(CodecName(codec)) + "/" +
         std::to_string(distortion_level);
}

void ValidateStimulus(const Stimulus& s) {
  if (s.source_id.empty()) {
    Fail(ErrorCode::kInvalidArgument, "stimulus has empty source_id");
  }
  if (s.distortion_level < 0 || s.distortion_level > kMaxDistortionLevel) {
    Fail(ErrorCode::kInvalidArgument,
         "distortion level " + std::to_string(s.distortion_level) +
             " outside [0, 10] for " + s.Key());
  }
  if ((s.distortion_level == 0) != (s.codec == Codec::kNone)) {
    Fail(ErrorCode::kInvalidArgument,
         "level 0 and codec NONE must coincide: " + s.Key());
  }
}

Question MakeQuestion(std::string question_id, QuestionKind kind,
                      Stimulus test) {
  Question q;
  q.question_id = std::move(question_id);
  q.kind = kind;
  q.reference = Stimulus::Pristine(test.source_id);
  q.test = std::move(test);
  return q;
}

void ValidateQuestion(const Question& q) {
  if (q.question_id.empty()) {
    Fail(ErrorCode::kInvalidArgument, "question has empty id");
  }
  ValidateStimulus(q.reference);
  ValidateStimulus(q.test);
  if (!q.reference.IsPristine() || q.reference.source_id != q.test.source_id) {
    Fail(ErrorCode::kInvalidArgument,
         "question " + q.question_id +
             ": reference must be the pristine version of the test source");
  }
  if (q.kind == QuestionKind::kTrapI &&
      q.test.distortion_level != kMaxDistortionLevel) {
    Fail(ErrorCode::kInvalidArgument,
         "question " + q.question_id + ": TRAP_I requires level 10");
  }
  if (q.kind == QuestionKind::kTrapII && !q.test.IsPristine()) {
    Fail(ErrorCode::kInvalidArgument,
         "question " + q.question_id + ": TRAP_II requires level 0");
  }
}

RatingTable RatingTable::Build(std::map<std::string, Question> questions,
                               std::map<std::string, BatchDef> batches,
                               std::vector<Rating> ratings) {
  RatingTable t;
  t.questions = std::move(questions);
  t.batches = std::move(batches);
  t.ratings = std::move(ratings);

  std::map<std::string, std::set<std::string>> batch_members;
  for (const auto& [id, b] : t.batches) {
    for (const auto& qid : b.question_ids) {
      if (!t.questions.contains(qid)) {
        Fail(ErrorCode::kDanglingReference,
             "batch " + id + " references unknown question " + qid);
      }
      batch_members[id].insert(qid);
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (size_t i = 0; i < t.ratings.size(); ++i) {
    const Rating& r = t.ratings[i];
    CheckScore(r.score, "rating " + std::to_string(i) + ": ");
    if (!t.questions.contains(r.question_id)) {
      Fail(ErrorCode::kDanglingReference, r.question_id);
    }
    if (!t.batches.empty()) {
      auto members = batch_members.find(r.batch_id);
      if (members == batch_members.end()) {
        Fail(ErrorCode::kDanglingReference, r.batch_id);
      }
      if (!members->second.contains(r.question_id)) {
        Fail(ErrorCode::kDanglingReference,
             r.question_id + " (not in batch " + r.batch_id + ")");
      }
    }
    if (r.subject_id.empty() || r.batch_instance_id.empty()) {
      Fail(ErrorCode::kMalformedRecord,
           "rating " + std::to_string(i) + " lacks subject or instance id");
    }
    if (r.toggle_count < 0 || r.elapsed_ms < 0) {
      Fail(ErrorCode::kMalformedRecord,
           "rating " + std::to_string(i) + " has negative counters");
    }
    if (!seen.emplace(r.batch_instance_id, r.question_id).second) {
      Fail(ErrorCode::kMalformedRecord,
           "duplicate rating of " + r.question_id + " in instance " +
               r.batch_instance_id);
    }
    auto [it, inserted] = t.instances.try_emplace(r.batch_instance_id);
    BatchInstance& inst = it->second;
    if (inserted) {
      inst.batch_instance_id = r.batch_instance_id;
      inst.subject_id = r.subject_id;
      inst.batch_id = r.batch_id;
    } else if (inst.subject_id != r.subject_id ||
               inst.batch_id != r.batch_id) {
      Fail(ErrorCode::kMalformedRecord,
           "instance " + r.batch_instance_id +
               " mixes subjects or batches");
    }
    inst.ratings.push_back(i);
    inst.completed_at = std::max(inst.completed_at, r.timestamp);
  }
  return t;
}

RatingTable RatingTable::Restrict(const IdSet& instance_ids) const {
  std::vector<Rating> kept;
  for (const Rating& r : ratings) {
    if (instance_ids.contains(r.batch_instance_id)) kept.push_back(r);
  }
  return Build(questions, batches, std::move(kept));
}

IdSet RatingTable::InstanceIds() const {
  IdSet ids;
  for (const auto& [id, inst] : instances) ids.insert(id);
  return ids;
}

IdSet RatingTable::SubjectIds() const {
  IdSet ids;
  for (const auto& [id, inst] : instances) ids.insert(inst.subject_id);
  return ids;
}

bool RatingTable::IsComplete(const BatchInstance& instance) const {
  auto it = batches.find(instance.batch_id);
  if (it == batches.end()) return true;
  return instance.ratings.size() == it->second.question_ids.size();
}

RatingTable ReadRatings(std::istream& in, const StudyConfig* config) {
  std::map<std::string, Question> questions;
  std::map<std::string, BatchDef> batches;
  std::vector<Rating> ratings;

  std::string text;
  size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      Fail(ErrorCode::kMalformedRecord, LineError(line, e.what()));
    }
    if (!j.is_object()) {
      Fail(ErrorCode::kMalformedRecord, LineError(line, "not an object"));
    }
    const std::string record =
        j.contains("record") ? Field<std::string>(j, "record", line)
                             : std::string("rating");
    if (record == "question") {
      Question q = QuestionFromJson(j, line);
      std::string id = q.question_id;
      questions.insert_or_assign(std::move(id), std::move(q));
    } else if (record == "batch") {
      BatchDef b = BatchFromJson(j, line);
      std::string id = b.batch_id;
      batches.insert_or_assign(std::move(id), std::move(b));
    } else if (record == "rating") {
      Rating r;
      r.subject_id = Field<std::string>(j, "subject_id", line);
      r.batch_instance_id = Field<std::string>(j, "batch_instance_id", line);
      r.batch_id = Field<std::string>(j, "batch_id", line);
      r.question_id = Field<std::string>(j, "question_id", line);
      r.score = Field<double>(j, "score", line);
      r.toggle_count = Field<int64_t>(j, "toggle_count", line);
      r.elapsed_ms = Field<int64_t>(j, "elapsed_ms", line);
      r.timestamp = Field<int64_t>(j, "timestamp", line);
      CheckScore(r.score, LineError(line, ""));
      if (r.toggle_count < 0 || r.elapsed_ms < 0) {
        Fail(ErrorCode::kMalformedRecord,
             LineError(line, "negative toggle_count or elapsed_ms"));
      }
      ratings.push_back(std::move(r));
    } else {
      Fail(ErrorCode::kMalformedRecord,
           LineError(line, "unknown record type '" + record + "'"));
    }
  }

  if (config != nullptr) {
    for (const auto& [id, q] : config->questions) questions.try_emplace(id, q);
    for (const auto& b : config->batches) batches.try_emplace(b.batch_id, b);
  }
  return RatingTable::Build(std::move(questions), std::move(batches),
                            std::move(ratings));
}

RatingTable LoadRatings(const std::filesystem::path& path,
                        const StudyConfig* config) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return ReadRatings(in, config);
}

void WriteRatings(const RatingTable& table, std::ostream& out) {
  for (const auto& [id, q] : table.questions) {
    json j = QuestionToJson(q);
    j["record"] = "question";
    out << j.dump() << '\n';
  }
  for (const auto& [id, b] : table.batches) {
    json j = BatchToJson(b);
    j["record"] = "batch";
    out << j.dump() << '\n';
  }
  for (const Rating& r : table.ratings) {
    json j{{"record", "rating"},
           {"subject_id", r.subject_id},
           {"batch_instance_id", r.batch_instance_id},
           {"batch_id", r.batch_id},
           {"question_id", r.question_id},
           {"score", r.score},
           {"toggle_count", r.toggle_count},
           {"elapsed_ms", r.elapsed_ms},
           {"timestamp", r.timestamp}};
    out << j.dump() << '\n';
  }
}

void SaveRatings(const RatingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  WriteRatings(table, out);
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

const BatchDef* StudyConfig::FindBatch(std::string_view batch_id) const {
  for (const auto& b : batches) {
    if (b.batch_id == batch_id) return &b;
  }
  return nullptr;
}

StudyConfig ParseStudyConfig(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kInvalidConfig, e.what());
  }
  StudyConfig c;
  try {
    c.study_id = j.value("study_id", c.study_id);
    c.asset_dir = j.value("asset_dir", c.asset_dir);
    c.sources = j.value("sources", std::vector<std::string>{});
    for (const auto& name : j.value("codecs", std::vector<std::string>{})) {
      auto codec = ParseCodec(name);
      if (!codec) Fail(ErrorCode::kInvalidConfig, "unknown codec " + name);
      c.codecs.push_back(*codec);
    }
    c.levels = j.value("levels", std::vector<int>{});
    if (j.contains("rules")) {
      const json& r = j["rules"];
      c.rules.study_questions =
          r.value("study_questions", c.rules.study_questions);
      c.rules.trap_i = r.value("trap_i", c.rules.trap_i);
      c.rules.trap_ii = r.value("trap_ii", c.rules.trap_ii);
    }
    if (j.contains("session")) {
      const json& s = j["session"];
      SessionRules& rules = c.session;
      rules.min_width = s.value("min_width", rules.min_width);
      rules.min_height = s.value("min_height", rules.min_height);
      rules.break_seconds = s.value("break_seconds", rules.break_seconds);
      rules.batches_per_session =
          s.value("batches_per_session", rules.batches_per_session);
      for (const auto& p : s.value("acuity_plates", json::array())) {
        rules.acuity_plates.push_back(
            AcuityPlate{p.at("plate_id").get<std::string>(),
                        p.at("image").get<std::string>(),
                        p.at("answer").get<std::string>()});
      }
      size_t item_line = 0;
      for (const auto& t : s.value("training", json::array())) {
        TrainingItem item;
        item.item_id = t.at("item_id").get<std::string>();
        item.test = StimulusFromJson(t, ++item_line);
        item.reference = Stimulus::Pristine(item.test.source_id);
        item.expected_lo = t.value("expected_lo", 0.0);
        item.expected_hi = t.value("expected_hi", 100.0);
        item.easy = t.value("easy", true);
        rules.training.push_back(std::move(item));
      }
    }
    size_t question_line = 0;
    for (const auto& q : j.value("questions", json::array())) {
      Question question = QuestionFromJson(q, ++question_line);
      std::string id = question.question_id;
      if (!c.questions.emplace(std::move(id), std::move(question)).second) {
        Fail(ErrorCode::kInvalidConfig,
             "duplicate question id " + q["question_id"].get<std::string>());
      }
    }
    size_t batch_line = 0;
    for (const auto& b : j.value("batches", json::array())) {
      c.batches.push_back(BatchFromJson(b, ++batch_line));
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidConfig, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidConfig) throw;
    Fail(ErrorCode::kInvalidConfig, e.what());
  }
  return c;
}

std::string SerializeStudyConfig(const StudyConfig& c) {
  json j;
  j["study_id"] = c.study_id;
  j["asset_dir"] = c.asset_dir;
  j["sources"] = c.sources;
  json codecs = json::array();
  for (Codec codec : c.codecs) codecs.push_back(std::string(CodecName(codec)));
  j["codecs"] = codecs;
  j["levels"] = c.levels;
  j["rules"] = {{"study_questions", c.rules.study_questions},
                {"trap_i", c.rules.trap_i},
                {"trap_ii", c.rules.trap_ii}};
  json plates = json::array();
  for (const auto& p : c.session.acuity_plates) {
    plates.push_back(
        {{"plate_id", p.plate_id}, {"image", p.image}, {"answer", p.answer}});
  }
  json training = json::array();
  for (const auto& t : c.session.training) {
    json item{{"item_id", t.item_id},
              {"expected_lo", t.expected_lo},
              {"expected_hi", t.expected_hi},
              {"easy", t.easy}};
    StimulusToJson(t.test, item);
    training.push_back(std::move(item));
  }
  j["session"] = {{"min_width", c.session.min_width},
                  {"min_height", c.session.min_height},
                  {"break_seconds", c.session.break_seconds},
                  {"batches_per_session", c.session.batches_per_session},
                  {"acuity_plates", plates},
                  {"training", training}};
  json questions = json::array();
  for (const auto& [id, q] : c.questions) questions.push_back(QuestionToJson(q));
  j["questions"] = questions;
  json batches = json::array();
  for (const auto& b : c.batches) batches.push_back(BatchToJson(b));
  j["batches"] = batches;
  return j.dump(2) + "\n";
}

StudyConfig LoadStudyConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseStudyConfig(buffer.str());
}

void SaveStudyConfig(const StudyConfig& config,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << SerializeStudyConfig(config);
}

StudyConfig GenerateDefaultConfig(uint64_t seed,
                                  const DefaultConfigOptions& options) {
  if (options.sources.empty() || options.codecs.empty() ||
      options.levels < 1 || options.batches < 1) {
    Fail(ErrorCode::kInvalidArgument, "empty default config dimensions");
  }
  Engine rng(seed);
  StudyConfig c;
  c.sources = options.sources;
  c.codecs = options.codecs;
  for (int level = 1; level <= options.levels; ++level) {
    c.levels.push_back(level);
  }
  c.rules = options.rules;

  std::vector<Stimulus> distorted;
  for (const auto& source : c.sources) {
    for (Codec codec : c.codecs) {
      for (int level : c.levels) distorted.push_back({source, codec, level});
    }
  }
  Shuffle(distorted, rng);

  const int num_batches = options.batches;
  const auto per_batch = static_cast<size_t>(c.rules.study_questions);
  std::vector<std::vector<Stimulus>> study(num_batches);
  for (size_t i = 0; i < distorted.size(); ++i) {
    auto& batch = study[i % num_batches];
    if (batch.size() < per_batch) batch.push_back(distorted[i]);
  }
  // Top up with repeats not yet present in the batch.
  for (auto& batch : study) {
    size_t cursor = UniformIndex(rng, distorted.size());
    for (size_t tries = 0;
         batch.size() < per_batch && tries < distorted.size(); ++tries) {
      const Stimulus& candidate = distorted[cursor];
      cursor = (cursor + 1) % distorted.size();
      if (std::find(batch.begin(), batch.end(), candidate) == batch.end()) {
        batch.push_back(candidate);
      }
    }
  }

  struct Pending {
    size_t batch;
    QuestionKind kind;
    Stimulus test;
  };
  std::vector<Pending> pending;
  const size_t num_sources = c.sources.size();
  const size_t num_codecs = c.codecs.size();
  const int max_level = c.levels.back();
  for (size_t b = 0; b < study.size(); ++b) {
    for (const auto& s : study[b]) {
      pending.push_back({b, QuestionKind::kStudy, s});
    }
    for (int i = 0; i < c.rules.trap_i; ++i) {
      const std::string& source = c.sources[i % num_sources];
      const Codec codec = c.codecs[(b + i) % num_codecs];
      pending.push_back(
          {b, QuestionKind::kTrapI, Stimulus{source, codec, max_level}});
    }
    for (int i = 0; i < c.rules.trap_ii; ++i) {
      pending.push_back({b, QuestionKind::kTrapII,
                         Stimulus::Pristine(c.sources[i % num_sources])});
    }
  }
  Shuffle(pending, rng);

  c.batches.resize(num_batches);
  for (int b = 0; b < num_batches; ++b) {
    c.batches[b].batch_id = "b" + std::to_string(b + 1);
  }
  char id[16];
  for (size_t i = 0; i < pending.size(); ++i) {
    std::snprintf(id, sizeof(id), "q%04zu", i + 1);
    Question q = MakeQuestion(id, pending[i].kind, pending[i].test);
    c.batches[pending[i].batch].question_ids.push_back(q.question_id);
    c.questions.emplace(q.question_id, std::move(q));
  }

  c.session.acuity_plates = {{"plate3", "ishihara_plate3.png", "6"},
                             {"plate4", "ishihara_plate4.png", "29"}};
  const std::string& first = c.sources.front();
  const std::string& last = c.sources.back();
  c.session.training = {
      {"train1", Stimulus::Pristine(first),
       Stimulus{first, c.codecs.front(), max_level}, 60.0, 100.0, true},
      {"train2", Stimulus::Pristine(last), Stimulus::Pristine(last), 0.0, 20.0,
       true},
      {"train3", Stimulus::Pristine(first),
       Stimulus{first, c.codecs.back(), std::max(1, max_level / 3)}, 0.0,
       60.0, false},
  };
  return c;
}

std::string_view ViolationKindName(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kMissingTraps: return "MissingTraps";
    case ViolationKind::kTrapCount: return "TrapCount";
    case ViolationKind::kStudyCount: return "StudyCount";
    case ViolationKind::kMissingAsset: return "MissingAsset";
    case ViolationKind::kDanglingQuestion: return "DanglingQuestion";
    case ViolationKind::kInvalidQuestion: return "InvalidQuestion";
    case ViolationKind::kDuplicateQuestionInBatch:
      return "DuplicateQuestionInBatch";
    case ViolationKind::kEmptyBatch: return "EmptyBatch";
  }
  return "Unknown";
}

std::vector<Violation> ValidateStudyConfig(const StudyConfig& config,
                                           const ValidationOptions& options) {
  std::vector<Violation> out;
  for (const auto& [id, q] : config.questions) {
    try {
      ValidateQuestion(q);
    } catch (const Error& e) {
      out.push_back({ViolationKind::kInvalidQuestion, id, e.what()});
    }
  }

  for (const auto& batch : config.batches) {
    if (batch.question_ids.empty()) {
      out.push_back({ViolationKind::kEmptyBatch, batch.batch_id, ""});
      continue;
    }
    int study = 0;
    int trap_i = 0;
    int trap_ii = 0;
    std::set<std::string> seen;
    for (const auto& qid : batch.question_ids) {
      if (!seen.insert(qid).second) {
        out.push_back(
            {ViolationKind::kDuplicateQuestionInBatch, batch.batch_id, qid});
      }
      auto it = config.questions.find(qid);
      if (it == config.questions.end()) {
        out.push_back({ViolationKind::kDanglingQuestion, batch.batch_id, qid});
        continue;
      }
      switch (it->second.kind) {
        case QuestionKind::kStudy: ++study; break;
        case QuestionKind::kTrapI: ++trap_i; break;
        case QuestionKind::kTrapII: ++trap_ii; break;
      }
    }
    if (study != config.rules.study_questions) {
      out.push_back({ViolationKind::kStudyCount, batch.batch_id,
                     std::to_string(study) + " study questions, expected " +
                         std::to_string(config.rules.study_questions)});
    }
    const int expected_traps = config.rules.trap_i + config.rules.trap_ii;
    if (trap_i + trap_ii == 0 && expected_traps > 0) {
      out.push_back({ViolationKind::kMissingTraps, batch.batch_id, ""});
    } else if (trap_i != config.rules.trap_i ||
               trap_ii != config.rules.trap_ii) {
      out.push_back({ViolationKind::kTrapCount, batch.batch_id,
                     std::to_string(trap_i) + " TRAP_I / " +
                         std::to_string(trap_ii) + " TRAP_II"});
    }
  }

  if (options.check_assets) {
    std::filesystem::path dir = config.asset_dir;
    if (dir.is_relative()) dir = options.base_dir / dir;
    std::set<std::string> files;
    for (const auto& [id, q] : config.questions) {
      files.insert(q.reference.AssetFileName());
      files.insert(q.test.AssetFileName());
    }
    for (const auto& p : config.session.acuity_plates) files.insert(p.image);
    for (const auto& t : config.session.training) {
      files.insert(t.reference.AssetFileName());
      files.insert(t.test.AssetFileName());
    }
    for (const auto& f : files) {
      const auto path = dir / f;
      if (!std::filesystem::exists(path)) {
        out.push_back({ViolationKind::kMissingAsset, path.string(), ""});
      }
    }
  }
  return out;
}

}  // namespace idsqs
