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

#include "idsqs/server.h"

#include <fstream>
#include <sstream>

#include "httplib.h"

namespace idsqs {

using nlohmann::json;

namespace {

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, ErrorCode code,
                const std::string& message, const json& detail) {
  Reply(res, HttpStatusFor(code),
        {{"error",
          {{"code", ErrorCodeName(code)},
           {"status", static_cast<int>(code)},
           {"message", message},
           {"detail", detail}}}});
}

// Runs a handler, mapping core errors onto structured replies.
template <typename Fn>
void Guard(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    ReplyError(res, e.code(), e.what(), e.detail());
  } catch (const Error& e) {
    ReplyError(res, e.code(), e.what(), json::object());
  } catch (const json::exception& e) {
    ReplyError(res, ErrorCode::kInvalidArgument,
               std::string("malformed JSON body: ") + e.what(), json::object());
  } catch (const std::exception& e) {
    ReplyError(res, ErrorCode::kInternal, e.what(), json::object());
  }
}

json Body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSessionNotFound: return 404;
    case ErrorCode::kPhaseViolation:
    case ErrorCode::kOutOfOrder:
    case ErrorCode::kDuplicateResponse:
    case ErrorCode::kDuplicateSubject: return 409;
    case ErrorCode::kRejected: return 403;
    case ErrorCode::kInsufficientDisplay:
    case ErrorCode::kScoreOutOfRange: return 422;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMalformedRecord: return 400;
    default: return 500;
  }
}

StudyServer::StudyServer(StudyService& service, std::filesystem::path base_dir)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  asset_dir_ = service_.config().asset_dir;
  if (asset_dir_.is_relative()) asset_dir_ = base_dir / asset_dir_;

  auto& s = *server_;
  s.Post("/sessions", [this](const httplib::Request& req,
                             httplib::Response& res) {
    Guard(res, [&] {
      const json body = Body(req);
      const std::string subject = body.value("subject_id", std::string());
      Reply(res, 201,
            service_.CreateSession(subject,
                                   body.value("client", json::object())));
    });
  });
  s.Get(R"(/sessions/([^/]+)/next)",
        [this](const httplib::Request& req, httplib::Response& res) {
          Guard(res, [&] {
            Reply(res, 200, service_.NextQuestion(req.matches[1].str()));
          });
        });
  s.Post(R"(/sessions/([^/]+)/responses)",
         [this](const httplib::Request& req, httplib::Response& res) {
           Guard(res, [&] {
             Reply(res, 200,
                   service_.SubmitResponse(req.matches[1].str(), Body(req)));
           });
         });
  s.Post(R"(/sessions/([^/]+)/gates/([^/]+))",
         [this](const httplib::Request& req, httplib::Response& res) {
           Guard(res, [&] {
             Reply(res, 200,
                   service_.RecordGate(req.matches[1].str(),
                                       req.matches[2].str(), Body(req)));
           });
         });
  s.Get(R"(/studies/([^/]+)/export)",
        [this](const httplib::Request& req, httplib::Response& res) {
          Guard(res, [&] {
            const std::string flag = req.get_param_value("include_partial");
            const bool partial = flag == "1" || flag == "true";
            res.status = 200;
            res.set_content(service_.ExportRatings(req.matches[1].str(), partial),
                            "application/x-ndjson");
          });
        });
  s.Get(R"(/assets/([^/]+))",
        [this](const httplib::Request& req, httplib::Response& res) {
          Guard(res, [&] {
            const auto file = service_.ResolveAsset(req.matches[1].str());
            std::ifstream in;
            if (file) in.open(asset_dir_ / *file, std::ios::binary);
            if (!file || !in) {
              Reply(res, 404,
                    {{"error",
                      {{"code", "NotFound"},
                       {"status", 404},
                       {"message", "no such asset"},
                       {"detail", json::object()}}}});
              return;
            }
            std::ostringstream data;
            data << in.rdbuf();
            res.status = 200;
            res.set_header("Cache-Control", "no-store");
            res.set_content(data.str(), "image/png");
          });
        });
  // The rating UI may be served from another origin.
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type"}});
  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  });
}

StudyServer::~StudyServer() { Stop(); }

bool StudyServer::Listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

int StudyServer::BindAnyPort(const std::string& host) {
  return server_->bind_to_any_port(host);
}

bool StudyServer::ListenAfterBind() { return server_->listen_after_bind(); }

void StudyServer::Stop() {
  if (server_) server_->stop();
}

bool StudyServer::IsRunning() const { return server_->is_running(); }

}  // namespace idsqs
