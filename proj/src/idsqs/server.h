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

// HTTP+JSON front end for StudyService.
//
//   POST /sessions                    {"subject_id", "client":{...}}
//   GET  /sessions/{id}/next
//   POST /sessions/{id}/responses     {"question_id", "score", ...}
//   POST /sessions/{id}/gates/{gate}  gate payload
//   GET  /studies/{id}/export[?include_partial=1]
//   GET  /assets/{token}.png
//
// Failures answer with {"error":{"code":"OutOfOrder","status":21,
// "message":"...","detail":{...}}}.

#ifndef IDSQS_SERVER_H_
#define IDSQS_SERVER_H_

#include <filesystem>
#include <memory>
#include <string>

#include "idsqs/service.h"

namespace httplib {
class Server;
}

namespace idsqs {

int HttpStatusFor(ErrorCode code);

class StudyServer {
 public:
  // Relative asset directories in the config resolve against `base_dir`.
  StudyServer(StudyService& service, std::filesystem::path base_dir);
  ~StudyServer();

  // Binds and serves until Stop(). Returns false when binding fails.
  bool Listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it, or -1.
  int BindAnyPort(const std::string& host);
  // Serves on a socket bound by BindAnyPort.
  bool ListenAfterBind();
  void Stop();
  bool IsRunning() const;

 private:
  StudyService& service_;
  std::filesystem::path asset_dir_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace idsqs

#endif  // IDSQS_SERVER_H_
