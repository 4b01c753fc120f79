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
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "test_util.h"

namespace idsqs {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct LiveServer {
  fs::path dir;
  StudyConfig config = GenerateDefaultConfig(81);
  std::unique_ptr<StudyService> service;
  std::unique_ptr<StudyServer> server;
  std::jthread thread;
  int port = -1;

  explicit LiveServer(const std::string& name) : dir(testing::TempDir(name)) {
    ServiceOptions options;
    options.log_path = dir / "events.jsonl";
    options.seed = 3;
    service = std::make_unique<StudyService>(config, options);
    server = std::make_unique<StudyServer>(*service, dir);
    port = server->BindAnyPort("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::jthread([this] { server->ListenAfterBind(); });
    for (int i = 0; i < 200 && !server->IsRunning(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }

  ~LiveServer() { server->Stop(); }

  httplib::Client Client() const { return httplib::Client("127.0.0.1", port); }
};

json Body(const httplib::Result& r) { return json::parse(r->body); }

httplib::Result Post(httplib::Client& c, const std::string& path, const json& body) {
  return c.Post(path, body.dump(), "application/json");
}

TEST_CASE("status mapping") {
  CHECK(HttpStatusFor(ErrorCode::kSessionNotFound) == 404);
  CHECK(HttpStatusFor(ErrorCode::kOutOfOrder) == 409);
  CHECK(HttpStatusFor(ErrorCode::kDuplicateSubject) == 409);
  CHECK(HttpStatusFor(ErrorCode::kRejected) == 403);
  CHECK(HttpStatusFor(ErrorCode::kInsufficientDisplay) == 422);
  CHECK(HttpStatusFor(ErrorCode::kScoreOutOfRange) == 422);
  CHECK(HttpStatusFor(ErrorCode::kInvalidArgument) == 400);
  CHECK(HttpStatusFor(ErrorCode::kIo) == 500);
}

TEST_CASE("sessions over HTTP") {
  LiveServer live("server_flow");
  auto c = live.Client();
  const json client = {{"width", 1920}, {"height", 1080}};

  auto created = Post(c, "/sessions", {{"subject_id", "w1"}, {"client", client}});
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = Body(created)["session_id"];
  CHECK(created->get_header_value("Access-Control-Allow-Origin") == "*");

  auto dup = Post(c, "/sessions", {{"subject_id", "w1"}, {"client", client}});
  CHECK(dup->status == 409);
  CHECK(Body(dup)["error"]["code"] == "DuplicateSubject");
  auto small = Post(c, "/sessions", {{"subject_id", "w2"}, {"client", {{"width", 1366}, {"height", 768}}}});
  CHECK(small->status == 422);
  CHECK(Body(small)["error"]["code"] == "InsufficientDisplay");
  auto junk = c.Post("/sessions", "{", "application/json");
  CHECK(junk->status == 400);

  CHECK(Body(c.Get("/sessions/" + id + "/next"))["gate"] == "consent");
  CHECK(Post(c, "/sessions/" + id + "/gates/consent", {{"accepted", true}})->status == 200);
  CHECK(Post(c, "/sessions/" + id + "/gates/acuity",
             {{"answers", {{"plate3", "6"}, {"plate4", "29"}}}})->status == 200);
  auto training = Post(c, "/sessions/" + id + "/gates/training",
                       {{"responses", {{{"item_id", "train1"}, {"score", 90}},
                                       {{"item_id", "train2"}, {"score", 0}}}}});
  CHECK(Body(training)["phase"] == "BATCH_1");

  const json q = Body(c.Get("/sessions/" + id + "/next"));
  CHECK(q["type"] == "question");
  auto wrong = Post(c, "/sessions/" + id + "/responses", {{"question_id", "zzz"}, {"score", 5}});
  CHECK(wrong->status == 409);
  CHECK(Body(wrong)["error"]["code"] == "OutOfOrder");
  CHECK(Body(wrong)["error"]["detail"]["expected_question"] == q["question_id"]);
  auto range = Post(c, "/sessions/" + id + "/responses",
                    {{"question_id", q["question_id"]}, {"score", 250}});
  CHECK(range->status == 422);
  auto ok = Post(c, "/sessions/" + id + "/responses",
                 {{"question_id", q["question_id"]}, {"score", 55}, {"toggle_count", 2},
                  {"elapsed_ms", 4000}});
  CHECK(ok->status == 200);
  CHECK(Body(ok)["accepted"] == true);

  CHECK(c.Get("/sessions/missing/next")->status == 404);
  CHECK(c.Get("/studies/idsqs/export")->status == 200);
  auto partial = c.Get("/studies/idsqs/export?include_partial=1");
  CHECK(partial->body.find(q["question_id"].get<std::string>()) != std::string::npos);
  CHECK(partial->body.find(R"("record":"rating")") != std::string::npos);
  CHECK(c.Get("/studies/other/export")->status == 400);
  auto options = c.Options("/sessions");
  CHECK(options->status == 204);
}

TEST_CASE("asset tokens serve files") {
  LiveServer live("server_assets");
  auto c = live.Client();
  auto created = Post(c, "/sessions", {{"subject_id", "w1"},
                                       {"client", {{"width", 2000}, {"height", 1200}}}});
  const std::string id = Body(created)["session_id"];
  Post(c, "/sessions/" + id + "/gates/consent", {{"accepted", true}});
  const json gate = Body(c.Get("/sessions/" + id + "/next"));
  const std::string url = gate["plates"][0]["image_url"];
  CHECK(c.Get(url)->status == 404);  // file not on disk yet
  fs::create_directories(live.dir / "assets");
  std::ofstream(live.dir / "assets" / "ishihara_plate3.png", std::ios::binary) << "PNGDATA";
  auto got = c.Get(url);
  CHECK(got->status == 200);
  CHECK(got->body == "PNGDATA");
  CHECK(got->get_header_value("Content-Type") == "image/png");
  CHECK(c.Get("/assets/0123456789abcdef.png")->status == 404);
  CHECK(c.Get("/assets/..%2F..%2Fevents.jsonl")->status == 404);
}

}  // namespace
}  // namespace idsqs
