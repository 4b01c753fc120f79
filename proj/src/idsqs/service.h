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

// Live study sessions: batch assignment, gated session flow, randomized
// question delivery and durable response capture.
//
// Every state change is one JSON line in an append-only event log. The log
// is written and flushed before the change is applied in memory, and the
// same apply path rebuilds the state when the service restarts:
//
//   {"event":"init","salt":"...","seed":7,"study_id":"idsqs"}
//   {"event":"session","session_id":"s...","subject_id":"w1","at":...,
//    "batches":["b2","b4"],"orders":[[...],[...]],"client":{...}}
//   {"event":"gate","session_id":"s...","gate":"acuity","at":...,
//    "payload":{...},"phase":"TRAINING"}
//   {"event":"response","session_id":"s...","question_id":"q0042",...}
//   {"event":"phase","session_id":"s...","phase":"BATCH_2","at":...}
//
// Payloads handed to clients never carry the question kind. Image URLs are
// opaque tokens keyed by a per-log salt and the question, so a trap whose
// reference and test are the same file still gets two unrelated URLs.

#ifndef IDSQS_SERVICE_H_
#define IDSQS_SERVICE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idsqs/domain.h"
#include "idsqs/error.h"
#include "json.hpp"

namespace idsqs {

enum class Phase {
  kConsent,
  kAcuity,
  kTraining,
  kBatch1,
  kBreak,
  kBatch2,
  kDone,
  kRejected,
};

std::string_view PhaseName(Phase phase);
std::optional<Phase> ParsePhase(std::string_view name);

// Error with a machine-readable detail object for clients, e.g.
// {"expected_question":"q0007"} for kOutOfOrder.
class ServiceError : public Error {
 public:
  ServiceError(ErrorCode code, const std::string& message,
               nlohmann::json detail = nlohmann::json::object())
      : Error(code, message), detail_(std::move(detail)) {}

  const nlohmann::json& detail() const { return detail_; }

 private:
  nlohmann::json detail_;
};

struct ClientMetadata {
  int width = 0;
  int height = 0;
  double display_diagonal = 0.0;  // inches, as reported

  bool operator==(const ClientMetadata&) const = default;
};

struct AcceptedResponse {
  std::string question_id;
  std::string batch_id;
  double score = 0.0;
  int64_t toggle_count = 0;
  int64_t elapsed_ms = 0;
  int64_t at = 0;
  ClientMetadata client;

  bool operator==(const AcceptedResponse&) const = default;
};

struct Session {
  std::string session_id;
  std::string subject_id;
  Phase phase = Phase::kConsent;
  std::vector<std::string> assigned_batches;
  std::vector<std::vector<std::string>> question_order;  // per batch
  size_t cursor = 0;                                      // within the batch
  int64_t created_at = 0;
  int64_t break_started_at = 0;
  ClientMetadata client;
  bool consented = false;
  int training_attempts = 0;
  std::string rejection_reason;
  std::vector<AcceptedResponse> responses;

  bool operator==(const Session&) const = default;

  // Index into assigned_batches of the batch being rated, if any.
  std::optional<size_t> ActiveBatch() const;
  std::string InstanceId(size_t batch_index) const;
};

using Clock = std::function<int64_t()>;  // ms since the Unix epoch

int64_t SystemClockMs();

struct ServiceOptions {
  std::filesystem::path log_path;
  // Salt and session randomness for a new log; random when unset. An
  // existing log keeps the seed recorded in it.
  std::optional<uint64_t> seed;
  Clock clock = SystemClockMs;
  std::string asset_url_prefix = "/assets/";
};

class StudyService {
 public:
  // Opens (or creates) the event log and replays it. Throws kInvalidConfig
  // when the config fails validation and kMalformedRecord on a corrupt log.
  StudyService(StudyConfig config, ServiceOptions options);

  ~StudyService();

  StudyService(const StudyService&) = delete;
  StudyService& operator=(const StudyService&) = delete;

  // `client` needs {"width","height"} and may carry "display_diagonal".
  // Returns the public session view.
  nlohmann::json CreateSession(const std::string& subject_id,
                               const nlohmann::json& client);

  // A question payload {"type":"question",...}, or a directive of type
  // "gate", "break" or "done".
  nlohmann::json NextQuestion(const std::string& session_id);

  // `response` carries question_id, score, toggle_count, elapsed_ms and an
  // optional client object.
  nlohmann::json SubmitResponse(const std::string& session_id,
                                const nlohmann::json& response);

  // gate is consent, acuity, training or break.
  nlohmann::json RecordGate(const std::string& session_id,
                            std::string_view gate,
                            const nlohmann::json& payload);

  // Rating table file contents with every accepted response of completed
  // batch instances (and of partial ones when asked).
  std::string ExportRatings(std::string_view study_id,
                            bool include_partial = false) const;

  // Asset file (relative to the asset directory) behind a URL token.
  std::optional<std::string> ResolveAsset(std::string_view token) const;

  std::vector<Session> Sessions() const;
  std::optional<Session> FindSession(const std::string& session_id) const;
  std::map<std::string, int> AssignmentCounts() const;

  const StudyConfig& config() const { return config_; }
  const std::filesystem::path& log_path() const { return options_.log_path; }

 private:
  void Append(const nlohmann::json& event);
  void Apply(const nlohmann::json& event);
  void Replay();

  Session& Get(const std::string& session_id);
  void IndexAssets();
  std::string Url(const std::string& key) const;
  nlohmann::json PublicView(const Session& s) const;
  nlohmann::json QuestionPayload(const Session& s) const;
  nlohmann::json GateDirective(const Session& s) const;
  // Moves a session out of BREAK once the break has run its course.
  void AdvanceBreak(Session& s, int64_t now);

  StudyConfig config_;
  ServiceOptions options_;
  std::string salt_;
  uint64_t seed_ = 0;
  mutable std::mutex mu_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, std::string> subjects_;  // subject -> session
  std::map<std::string, int> assigned_;          // batch -> sessions
  std::map<std::string, std::string> assets_;    // token -> file
  std::map<std::string, std::string> tokens_;    // key -> token
  int fd_ = -1;
};

}  // namespace idsqs

#endif  // IDSQS_SERVICE_H_
