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

#include "idsqs/service.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "idsqs/random.h"

namespace idsqs {

using nlohmann::json;

namespace {

constexpr uint64_t kSaltStream = 0x5a17;
constexpr uint64_t kSessionStream = 1'000'000;

uint64_t Fnv1a(std::string_view a, std::string_view b) {
  uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  mix(a);
  mix("\x1f");
  mix(b);
  return h;
}

std::string Hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string Lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string AnswerText(const json& v) {
  if (v.is_string()) return Trim(v.get<std::string>());
  if (v.is_number_integer()) return std::to_string(v.get<int64_t>());
  if (v.is_number()) return v.dump();
  return "";
}

json ClientToJson(const ClientMetadata& c) {
  return {{"width", c.width},
          {"height", c.height},
          {"display_diagonal", c.display_diagonal}};
}

ClientMetadata ClientFromJson(const json& j) {
  ClientMetadata c;
  if (!j.is_object()) return c;
  c.width = j.value("width", 0);
  c.height = j.value("height", 0);
  c.display_diagonal = j.value("display_diagonal", 0.0);
  // Some clients send "resolution": [w, h] or "1920x1080".
  if (j.contains("resolution")) {
    const json& r = j["resolution"];
    if (r.is_array() && r.size() == 2 && r[0].is_number() && r[1].is_number()) {
      c.width = r[0].get<int>();
      c.height = r[1].get<int>();
    } else if (r.is_string()) {
      int w = 0;
      int h = 0;
      if (std::sscanf(r.get<std::string>().c_str(), "%dx%d", &w, &h) == 2) {
        c.width = w;
        c.height = h;
      }
    }
  }
  return c;
}

[[noreturn]] void Reject(const Session& s) {
  throw ServiceError(ErrorCode::kRejected, "session rejected: " + s.rejection_reason,
                     {{"reason", s.rejection_reason}});
}

double RequireNumber(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_number()) {
    throw ServiceError(ErrorCode::kInvalidArgument,
                       std::string("missing numeric field ") + key);
  }
  return j[key].get<double>();
}

int64_t OptionalCount(const json& j, const char* key) {
  if (!j.contains(key)) return 0;
  if (!j[key].is_number_integer() || j[key].get<int64_t>() < 0) {
    throw ServiceError(ErrorCode::kInvalidArgument,
                       std::string(key) + " must be a non-negative integer");
  }
  return j[key].get<int64_t>();
}

void CheckScore(double score) {
  if (!std::isfinite(score) || score < kMinScore || score > kMaxScore) {
    throw ServiceError(ErrorCode::kScoreOutOfRange,
                       "score must lie in [0, 100]", {{"score", score}});
  }
}

}  // namespace

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kConsent: return "CONSENT";
    case Phase::kAcuity: return "ACUITY";
    case Phase::kTraining: return "TRAINING";
    case Phase::kBatch1: return "BATCH_1";
    case Phase::kBreak: return "BREAK";
    case Phase::kBatch2: return "BATCH_2";
    case Phase::kDone: return "DONE";
    case Phase::kRejected: return "REJECTED";
  }
  return "CONSENT";
}

std::optional<Phase> ParsePhase(std::string_view name) {
  for (Phase p : {Phase::kConsent, Phase::kAcuity, Phase::kTraining,
                  Phase::kBatch1, Phase::kBreak, Phase::kBatch2, Phase::kDone,
                  Phase::kRejected}) {
    if (PhaseName(p) == name) return p;
  }
  return std::nullopt;
}

std::optional<size_t> Session::ActiveBatch() const {
  if (phase == Phase::kBatch1) return 0;
  if (phase == Phase::kBatch2) return 1;
  return std::nullopt;
}

std::string Session::InstanceId(size_t batch_index) const {
  return session_id + "-" + assigned_batches.at(batch_index);
}

int64_t SystemClockMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

StudyService::StudyService(StudyConfig config, ServiceOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  if (config_.batches.empty()) {
    Fail(ErrorCode::kInvalidConfig, "study config has no batches");
  }
  // Composition rules are a study-design check (validate-config); only
  // structural problems stop the service.
  for (const auto& v :
       ValidateStudyConfig(config_, ValidationOptions{.check_assets = false})) {
    switch (v.kind) {
      case ViolationKind::kDanglingQuestion:
      case ViolationKind::kInvalidQuestion:
      case ViolationKind::kDuplicateQuestionInBatch:
      case ViolationKind::kEmptyBatch:
        Fail(ErrorCode::kInvalidConfig,
             std::string(ViolationKindName(v.kind)) + ": " + v.subject + " " +
                 v.detail);
      default:
        break;
    }
  }
  for (const auto& b : config_.batches) assigned_[b.batch_id] = 0;

  if (!options_.log_path.parent_path().empty()) {
    std::filesystem::create_directories(options_.log_path.parent_path());
  }
  Replay();
  fd_ = ::open(options_.log_path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd_ < 0) {
    Fail(ErrorCode::kIo, "cannot open event log " + options_.log_path.string() +
                             ": " + std::strerror(errno));
  }
  if (salt_.empty()) {
    seed_ = options_.seed ? *options_.seed : std::random_device{}();
    Engine rng = DerivedEngine(seed_, kSaltStream);
    const uint64_t hi = rng();
    const uint64_t lo = rng();
    json init{{"event", "init"},
              {"salt", Hex(hi) + Hex(lo)},
              {"seed", seed_},
              {"study_id", config_.study_id}};
    Append(init);
    Apply(init);
  }
  IndexAssets();
}

StudyService::~StudyService() {
  if (fd_ >= 0) ::close(fd_);
}

void StudyService::Replay() {
  std::ifstream in(options_.log_path, std::ios::binary);
  if (!in) return;
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  in.close();

  size_t pos = 0;
  size_t line_no = 0;
  while (pos < content.size()) {
    const size_t end = content.find('\n', pos);
    if (end == std::string::npos) {
      // A torn final line was never acknowledged; drop it.
      std::filesystem::resize_file(options_.log_path, pos);
      break;
    }
    ++line_no;
    const std::string_view line(content.data() + pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    json event;
    try {
      event = json::parse(line);
      if (line_no == 1 && event.at("event") != "init") {
        Fail(ErrorCode::kMalformedRecord, "event log must start with init");
      }
      Apply(event);
    } catch (const json::exception& e) {
      Fail(ErrorCode::kMalformedRecord, "event log line " +
                                            std::to_string(line_no) + ": " +
                                            e.what());
    }
  }
}

void StudyService::Append(const json& event) {
  const std::string line = event.dump() + "\n";
  size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      Fail(ErrorCode::kIo, std::string("event log write failed: ") +
                               std::strerror(errno));
    }
    written += static_cast<size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    Fail(ErrorCode::kIo, std::string("event log sync failed: ") +
                             std::strerror(errno));
  }
}

void StudyService::Apply(const json& event) {
  const std::string type = event.at("event").get<std::string>();
  if (type == "init") {
    salt_ = event.at("salt").get<std::string>();
    seed_ = event.at("seed").get<uint64_t>();
    return;
  }
  const std::string id = event.at("session_id").get<std::string>();
  if (type == "session") {
    Session s;
    s.session_id = id;
    s.subject_id = event.at("subject_id").get<std::string>();
    s.created_at = event.at("at").get<int64_t>();
    s.assigned_batches = event.at("batches").get<std::vector<std::string>>();
    s.question_order =
        event.at("orders").get<std::vector<std::vector<std::string>>>();
    s.client = ClientFromJson(event.at("client"));
    for (const auto& b : s.assigned_batches) ++assigned_[b];
    subjects_[s.subject_id] = id;
    sessions_[id] = std::move(s);
    return;
  }
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    Fail(ErrorCode::kMalformedRecord, "event for unknown session " + id);
  }
  Session& s = it->second;
  if (type == "response") {
    AcceptedResponse r;
    r.question_id = event.at("question_id").get<std::string>();
    r.batch_id = event.at("batch_id").get<std::string>();
    r.score = event.at("score").get<double>();
    r.toggle_count = event.at("toggle_count").get<int64_t>();
    r.elapsed_ms = event.at("elapsed_ms").get<int64_t>();
    r.at = event.at("at").get<int64_t>();
    r.client = ClientFromJson(event.at("client"));
    const auto active = s.ActiveBatch();
    if (!active) {
      Fail(ErrorCode::kMalformedRecord, "response outside a batch phase");
    }
    const size_t batch = *active;
    s.responses.push_back(std::move(r));
    if (++s.cursor == s.question_order[batch].size()) {
      s.cursor = 0;
      if (batch == 0 && s.assigned_batches.size() > 1) {
        s.phase = Phase::kBreak;
        s.break_started_at = s.responses.back().at;
      } else {
        s.phase = Phase::kDone;
      }
    }
    return;
  }
  if (type == "gate" || type == "phase") {
    const auto phase = ParsePhase(event.at("phase").get<std::string>());
    if (!phase) Fail(ErrorCode::kMalformedRecord, "unknown phase");
    if (type == "gate") {
      const std::string gate = event.at("gate").get<std::string>();
      if (gate == "consent") s.consented = *phase != Phase::kRejected;
      if (gate == "training") ++s.training_attempts;
      if (event.contains("reason")) {
        s.rejection_reason = event["reason"].get<std::string>();
      }
    }
    s.phase = *phase;
    s.cursor = 0;
    return;
  }
  Fail(ErrorCode::kMalformedRecord, "unknown event type " + type);
}

void StudyService::IndexAssets() {
  auto add = [this](const std::string& key, const std::string& file) {
    const std::string token = Hex(Fnv1a(salt_, key));
    tokens_[key] = token;
    assets_[token] = file;
  };
  for (const auto& [id, q] : config_.questions) {
    add("q|" + id + "|ref", q.reference.AssetFileName());
    add("q|" + id + "|test", q.test.AssetFileName());
  }
  for (const auto& p : config_.session.acuity_plates) {
    add("plate|" + p.plate_id, p.image);
  }
  for (const auto& t : config_.session.training) {
    add("train|" + t.item_id + "|ref", t.reference.AssetFileName());
    add("train|" + t.item_id + "|test", t.test.AssetFileName());
  }
}

std::string StudyService::Url(const std::string& key) const {
  return options_.asset_url_prefix + tokens_.at(key) + ".png";
}

std::optional<std::string> StudyService::ResolveAsset(
    std::string_view token) const {
  if (token.ends_with(".png")) token.remove_suffix(4);
  std::lock_guard lock(mu_);
  auto it = assets_.find(std::string(token));
  if (it == assets_.end()) return std::nullopt;
  return it->second;
}

Session& StudyService::Get(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw ServiceError(ErrorCode::kSessionNotFound,
                       "no session " + session_id,
                       {{"session_id", session_id}});
  }
  return it->second;
}

json StudyService::PublicView(const Session& s) const {
  json j{{"session_id", s.session_id},
         {"subject_id", s.subject_id},
         {"phase", PhaseName(s.phase)},
         {"batches", s.assigned_batches.size()},
         {"break_seconds", config_.session.break_seconds}};
  if (auto b = s.ActiveBatch()) {
    j["batch"] = *b + 1;
    j["position"] = s.cursor;
    j["total"] = s.question_order[*b].size();
  }
  if (s.phase == Phase::kRejected) j["reason"] = s.rejection_reason;
  return j;
}

json StudyService::QuestionPayload(const Session& s) const {
  const size_t b = *s.ActiveBatch();
  const std::string& qid = s.question_order[b][s.cursor];
  return {{"type", "question"},
          {"session_id", s.session_id},
          {"question_id", qid},
          {"reference_url", Url("q|" + qid + "|ref")},
          {"test_url", Url("q|" + qid + "|test")},
          {"batch", b + 1},
          {"position", s.cursor + 1},
          {"total", s.question_order[b].size()}};
}

json StudyService::GateDirective(const Session& s) const {
  json j{{"type", "gate"}, {"session_id", s.session_id}};
  switch (s.phase) {
    case Phase::kConsent:
      j["gate"] = "consent";
      break;
    case Phase::kAcuity: {
      j["gate"] = "acuity";
      json plates = json::array();
      for (const auto& p : config_.session.acuity_plates) {
        plates.push_back({{"plate_id", p.plate_id},
                          {"image_url", Url("plate|" + p.plate_id)}});
      }
      j["plates"] = plates;
      break;
    }
    default: {
      j["gate"] = "training";
      json items = json::array();
      for (const auto& t : config_.session.training) {
        items.push_back({{"item_id", t.item_id},
                         {"reference_url", Url("train|" + t.item_id + "|ref")},
                         {"test_url", Url("train|" + t.item_id + "|test")}});
      }
      j["items"] = items;
      break;
    }
  }
  return j;
}

void StudyService::AdvanceBreak(Session& s, int64_t now) {
  if (s.phase != Phase::kBreak) return;
  const int64_t break_ms = int64_t{config_.session.break_seconds} * 1000;
  if (now - s.break_started_at < break_ms) return;
  json event{{"event", "phase"},
             {"session_id", s.session_id},
             {"phase", PhaseName(Phase::kBatch2)},
             {"at", now}};
  Append(event);
  Apply(event);
}

json StudyService::CreateSession(const std::string& subject_id,
                                 const json& client) {
  std::lock_guard lock(mu_);
  if (Trim(subject_id).empty()) {
    throw ServiceError(ErrorCode::kInvalidArgument, "subject_id is required");
  }
  if (auto it = subjects_.find(subject_id); it != subjects_.end()) {
    throw ServiceError(ErrorCode::kDuplicateSubject,
                       "subject " + subject_id + " already has a session",
                       {{"subject_id", subject_id}});
  }
  const ClientMetadata meta = ClientFromJson(client);
  if (meta.width < config_.session.min_width ||
      meta.height < config_.session.min_height) {
    throw ServiceError(
        ErrorCode::kInsufficientDisplay,
        "display " + std::to_string(meta.width) + "x" +
            std::to_string(meta.height) + " is below " +
            std::to_string(config_.session.min_width) + "x" +
            std::to_string(config_.session.min_height),
        {{"width", meta.width},
         {"height", meta.height},
         {"min_width", config_.session.min_width},
         {"min_height", config_.session.min_height}});
  }

  const uint64_t n = sessions_.size();
  Engine rng = DerivedEngine(seed_, kSessionStream + n);
  const std::string session_id = "s" + Hex(rng());

  // Least-assigned batches first; shuffling before the stable sort breaks
  // ties at random.
  std::vector<std::string> batches;
  for (const auto& b : config_.batches) batches.push_back(b.batch_id);
  Shuffle(batches, rng);
  std::stable_sort(batches.begin(), batches.end(),
                   [this](const std::string& a, const std::string& b) {
                     return assigned_.at(a) < assigned_.at(b);
                   });
  const size_t k = std::min<size_t>(
      std::max(config_.session.batches_per_session, 1), batches.size());
  batches.resize(k);
  std::vector<std::vector<std::string>> orders;
  for (const auto& b : batches) {
    std::vector<std::string> order = config_.FindBatch(b)->question_ids;
    Shuffle(order, rng);
    orders.push_back(std::move(order));
  }

  json event{{"event", "session"},
             {"session_id", session_id},
             {"subject_id", subject_id},
             {"at", options_.clock()},
             {"batches", batches},
             {"orders", orders},
             {"client", ClientToJson(meta)}};
  Append(event);
  Apply(event);
  return PublicView(sessions_.at(session_id));
}

json StudyService::NextQuestion(const std::string& session_id) {
  std::lock_guard lock(mu_);
  Session& s = Get(session_id);
  const int64_t now = options_.clock();
  AdvanceBreak(s, now);
  switch (s.phase) {
    case Phase::kConsent:
    case Phase::kAcuity:
    case Phase::kTraining:
      return GateDirective(s);
    case Phase::kBatch1:
    case Phase::kBatch2:
      return QuestionPayload(s);
    case Phase::kBreak: {
      const int64_t break_ms = int64_t{config_.session.break_seconds} * 1000;
      const int64_t left = break_ms - (now - s.break_started_at);
      return {{"type", "break"},
              {"session_id", s.session_id},
              {"wait_remaining", static_cast<double>(left) / 1000.0},
              {"break_seconds", config_.session.break_seconds},
              {"optional", true}};
    }
    case Phase::kDone:
      return {{"type", "done"}, {"session_id", s.session_id}};
    case Phase::kRejected:
      Reject(s);
  }
  Fail(ErrorCode::kInternal, "unreachable phase");
}

json StudyService::SubmitResponse(const std::string& session_id,
                                  const json& response) {
  std::lock_guard lock(mu_);
  Session& s = Get(session_id);
  const int64_t now = options_.clock();
  AdvanceBreak(s, now);
  if (s.phase == Phase::kRejected) Reject(s);
  const auto batch = s.ActiveBatch();
  if (!batch) {
    json detail{{"phase", PhaseName(s.phase)}};
    if (s.phase == Phase::kBreak) {
      const int64_t break_ms = int64_t{config_.session.break_seconds} * 1000;
      detail["wait_remaining"] =
          static_cast<double>(break_ms - (now - s.break_started_at)) / 1000.0;
    }
    throw ServiceError(ErrorCode::kPhaseViolation,
                       "responses are not accepted in phase " +
                           std::string(PhaseName(s.phase)),
                       detail);
  }
  if (!response.is_object() || !response.contains("question_id") ||
      !response["question_id"].is_string()) {
    throw ServiceError(ErrorCode::kInvalidArgument, "question_id is required");
  }
  const std::string qid = response["question_id"].get<std::string>();
  const std::string& batch_id = s.assigned_batches[*batch];
  for (const auto& r : s.responses) {
    if (r.batch_id == batch_id && r.question_id == qid) {
      throw ServiceError(ErrorCode::kDuplicateResponse,
                         "question " + qid + " was already answered",
                         {{"question_id", qid}});
    }
  }
  const std::string& expected = s.question_order[*batch][s.cursor];
  if (qid != expected) {
    throw ServiceError(ErrorCode::kOutOfOrder,
                       "expected question " + expected + ", got " + qid,
                       {{"expected_question", expected}});
  }
  const double score = RequireNumber(response, "score");
  CheckScore(score);
  const int64_t toggles = OptionalCount(response, "toggle_count");
  const int64_t elapsed = OptionalCount(response, "elapsed_ms");
  const ClientMetadata client = response.contains("client")
                                    ? ClientFromJson(response["client"])
                                    : s.client;

  json event{{"event", "response"},
             {"session_id", s.session_id},
             {"question_id", qid},
             {"batch_id", batch_id},
             {"score", score},
             {"toggle_count", toggles},
             {"elapsed_ms", elapsed},
             {"at", now},
             {"client", ClientToJson(client)}};
  Append(event);
  Apply(event);
  json ack{{"accepted", true},
           {"session_id", s.session_id},
           {"question_id", qid},
           {"phase", PhaseName(s.phase)}};
  if (auto b = s.ActiveBatch()) ack["position"] = s.cursor;
  return ack;
}

json StudyService::RecordGate(const std::string& session_id,
                              std::string_view gate, const json& payload) {
  std::lock_guard lock(mu_);
  Session& s = Get(session_id);
  const int64_t now = options_.clock();
  if (s.phase == Phase::kRejected) Reject(s);

  Phase required;
  if (gate == "consent") {
    required = Phase::kConsent;
  } else if (gate == "acuity") {
    required = Phase::kAcuity;
  } else if (gate == "training") {
    required = Phase::kTraining;
  } else if (gate == "break") {
    required = Phase::kBreak;
  } else {
    throw ServiceError(ErrorCode::kInvalidArgument,
                       "unknown gate " + std::string(gate));
  }
  if (s.phase != required) {
    throw ServiceError(ErrorCode::kPhaseViolation,
                       "gate " + std::string(gate) + " is not open in phase " +
                           std::string(PhaseName(s.phase)),
                       {{"phase", PhaseName(s.phase)}, {"gate", gate}});
  }
  if (!payload.is_object()) {
    throw ServiceError(ErrorCode::kInvalidArgument, "gate payload must be an object");
  }

  Phase next = s.phase;
  std::string reason;
  json result{{"session_id", s.session_id}, {"gate", gate}};
  if (gate == "consent") {
    if (!payload.contains("accepted") || !payload["accepted"].is_boolean()) {
      throw ServiceError(ErrorCode::kInvalidArgument,
                         "consent needs a boolean 'accepted'");
    }
    if (payload["accepted"].get<bool>()) {
      next = Phase::kAcuity;
    } else {
      next = Phase::kRejected;
      reason = "consent declined";
    }
  } else if (gate == "acuity") {
    const json answers = payload.value("answers", json::object());
    std::vector<std::string> wrong;
    for (const auto& p : config_.session.acuity_plates) {
      const std::string given =
          answers.is_object() && answers.contains(p.plate_id)
              ? AnswerText(answers[p.plate_id])
              : "";
      if (Lower(given) != Lower(Trim(p.answer))) wrong.push_back(p.plate_id);
    }
    if (wrong.empty()) {
      next = Phase::kTraining;
    } else {
      next = Phase::kRejected;
      reason = "acuity plate answered incorrectly";
    }
  } else if (gate == "training") {
    const json responses = payload.value("responses", json::array());
    if (!responses.is_array()) {
      throw ServiceError(ErrorCode::kInvalidArgument,
                         "training needs a 'responses' array");
    }
    json feedback = json::array();
    bool passed = true;
    for (const auto& item : config_.session.training) {
      std::optional<double> score;
      for (const auto& r : responses) {
        if (r.is_object() && r.value("item_id", std::string()) == item.item_id) {
          score = RequireNumber(r, "score");
          CheckScore(*score);
        }
      }
      const bool within = score && *score >= item.expected_lo &&
                          *score <= item.expected_hi;
      if (!within && item.easy) passed = false;
      json f{{"item_id", item.item_id},
             {"within_expected", within},
             {"expected_lo", item.expected_lo},
             {"expected_hi", item.expected_hi},
             {"easy", item.easy}};
      f["score"] = score ? json(*score) : json(nullptr);
      feedback.push_back(f);
    }
    result["feedback"] = feedback;
    result["passed"] = passed;
    if (passed) next = Phase::kBatch1;
  } else {  // break
    if (!payload.contains("continue") || !payload["continue"].is_boolean()) {
      throw ServiceError(ErrorCode::kInvalidArgument,
                         "break needs a boolean 'continue'");
    }
    if (!payload["continue"].get<bool>()) {
      next = Phase::kDone;
    } else {
      const int64_t break_ms = int64_t{config_.session.break_seconds} * 1000;
      const int64_t left = break_ms - (now - s.break_started_at);
      if (left > 0) {
        throw ServiceError(ErrorCode::kPhaseViolation, "break is not over",
                           {{"phase", PhaseName(s.phase)},
                            {"wait_remaining", static_cast<double>(left) / 1000.0}});
      }
      next = Phase::kBatch2;
    }
  }

  json event{{"event", "gate"},
             {"session_id", s.session_id},
             {"gate", gate},
             {"payload", payload},
             {"phase", PhaseName(next)},
             {"at", now}};
  if (!reason.empty()) event["reason"] = reason;
  Append(event);
  Apply(event);
  if (s.phase == Phase::kRejected) Reject(s);
  result["phase"] = PhaseName(s.phase);
  return result;
}

std::string StudyService::ExportRatings(std::string_view study_id,
                                        bool include_partial) const {
  std::lock_guard lock(mu_);
  if (study_id != config_.study_id) {
    throw ServiceError(ErrorCode::kInvalidArgument,
                       "unknown study " + std::string(study_id),
                       {{"study_id", study_id}});
  }
  std::vector<Rating> ratings;
  for (const auto& [id, s] : sessions_) {
    for (size_t b = 0; b < s.assigned_batches.size(); ++b) {
      const std::string& batch_id = s.assigned_batches[b];
      std::vector<const AcceptedResponse*> rs;
      for (const auto& r : s.responses) {
        if (r.batch_id == batch_id) rs.push_back(&r);
      }
      if (rs.empty()) continue;
      if (!include_partial && rs.size() < s.question_order[b].size()) continue;
      for (const auto* r : rs) {
        ratings.push_back(Rating{s.subject_id, s.InstanceId(b), batch_id,
                                 r->question_id, r->score, r->toggle_count,
                                 r->elapsed_ms, r->at});
      }
    }
  }
  std::map<std::string, BatchDef> batches;
  for (const auto& b : config_.batches) batches[b.batch_id] = b;
  const RatingTable table =
      RatingTable::Build(config_.questions, std::move(batches), std::move(ratings));
  std::ostringstream out;
  WriteRatings(table, out);
  return out.str();
}

std::vector<Session> StudyService::Sessions() const {
  std::lock_guard lock(mu_);
  std::vector<Session> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

std::optional<Session> StudyService::FindSession(
    const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, int> StudyService::AssignmentCounts() const {
  std::lock_guard lock(mu_);
  return assigned_;
}

}  // namespace idsqs
