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

#include "idsqs/reports.h"

#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "test_util.h"

namespace idsqs {
namespace {

using nlohmann::json;
using testing::CodeOf;

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> Split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

DmosTable CubicPanel() {
  DmosTable t;
  t.reference_mos["src02"] = 4.5;
  t.dmos[Stimulus::Pristine("src02")] = 0;
  for (int level = 1; level <= 6; ++level) {
    const double x = level;
    t.dmos[{"src02", Codec::kAvif, level}] = 1 + 2 * x - 0.5 * x * x + 0.1 * x * x * x;
  }
  t.dmos[{"src02", Codec::kJpeg, 3}] = 12;
  for (const auto& [s, d] : t.dmos) t.mos[s] = d + 4.5;
  return t;
}

TEST_CASE("DMOS records round-trip exactly") {
  const DmosTable t = CubicPanel();
  std::ostringstream out;
  WriteDmos(t, out);
  std::istringstream in(out.str());
  const DmosTable back = ReadDmos(in);
  CHECK(back.dmos == t.dmos);
  CHECK(back.mos == t.mos);
  CHECK(back.reference_mos == t.reference_mos);
  for (const auto& line : Lines(out.str())) CHECK(json::parse(line).contains("record"));
}

TEST_CASE("DMOS series panels start at the reference") {
  const DmosTable t = CubicPanel();
  BootstrapCI ci;
  ci.intervals[{"src02", Codec::kAvif, 2}] = {0.0, -1.0, 5.0};
  std::ostringstream out;
  WriteDmosSeries(t, &ci, out);
  const auto lines = Lines(out.str());
  REQUIRE(lines.size() == 1 + 7 + 2);
  CHECK(lines[0] == "source_id,codec,distortion_level,dmos,ci_lo,ci_hi,cubic_fit");
  // Codec order puts the JPEG panel first. It has two rows, too few for a
  // cubic.
  const auto jpeg0 = Split(lines[1]);
  const auto jpeg = Split(lines[2]);
  CHECK(jpeg0[1] == "JPEG");
  CHECK(jpeg0[2] == "0");
  CHECK(jpeg[3] == "12.000000");
  CHECK(jpeg[4].empty());
  CHECK(jpeg[6].empty());
  // AVIF panel: level 0 then 1..6.
  CHECK(Split(lines[3])[1] == "AVIF");
  CHECK(Split(lines[3])[2] == "0");
  const auto row2 = Split(lines[5]);
  CHECK(row2[2] == "2");
  CHECK(row2[4] == "-1.000000");
  CHECK(row2[5] == "5.000000");
  for (int i = 3; i <= 9; ++i) CHECK_FALSE(Split(lines[i])[6].empty());
}

TEST_CASE("series cubic column reproduces an exact cubic") {
  DmosTable t;
  t.dmos[Stimulus::Pristine("src06")] = 0;
  for (int level = 1; level <= 10; ++level) {
    const double x = level;
    t.dmos[{"src06", Codec::kJpegXl, level}] = 2 * x + 0.3 * x * x - 0.01 * x * x * x;
  }
  std::ostringstream out;
  WriteDmosSeries(t, nullptr, out);
  const auto lines = Lines(out.str());
  REQUIRE(lines.size() == 12);
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto cells = Split(lines[i]);
    CHECK(std::stod(cells[6]) == doctest::Approx(std::stod(cells[3])).epsilon(1e-6));
  }
}

TEST_CASE("JND records with and without a discriminator") {
  std::istringstream in(
      R"({"source_id":"src02","codec":"JPEG","distortion_level":3,"jnd":1.5})"
      "\n\n"
      R"({"record":"jnd","source_id":"src02","codec":"NONE","distortion_level":0,"jnd":0})"
      "\n");
  const JndTable t = ReadJnd(in);
  CHECK(t.jnd.size() == 2);
  CHECK(t.jnd.at({"src02", Codec::kJpeg, 3}) == 1.5);
  std::ostringstream out;
  WriteJnd(t, out);
  std::istringstream again(out.str());
  CHECK(ReadJnd(again).jnd == t.jnd);
  std::istringstream bad(R"({"source_id":"src02","codec":"MPEG","distortion_level":3,"jnd":1})");
  CHECK(CodeOf([&] { ReadJnd(bad); }) == ErrorCode::kMalformedRecord);
}

TEST_CASE("stage reports are JSON lines") {
  CleansingReport c;
  c.threshold = 0.65;
  c.accuracy = {{"a", 0.9}, {"b", 0.4}};
  c.kept = {"a"};
  c.discarded = {"b"};
  std::ostringstream out;
  WriteCleansingReport(c, out);
  const auto lines = Lines(out.str());
  CHECK(lines.size() >= 2);
  for (const auto& line : lines) CHECK(json::accept(line));
  CHECK(Summarize(c) == "cleansing: 2 instances, Otsu threshold 0.65 (100 bins), 1 discarded, 1 kept");

  RecoveryMetrics m{1.25, 0.99, 0.97, 50, 45};
  CHECK(Summarize(m) ==
        "recovery: RMSE 1.250, PLCC 0.9900, bias correlation 0.9700 (50 questions, 45 subjects)");
}

TEST_CASE("write failures surface as I/O errors") {
  const auto dir = testing::TempDir("reports");
  const auto path = dir / "ok.txt";
  WriteFile(path, [](std::ostream& o) { o << "hello\n"; });
  CHECK(std::filesystem::file_size(path) == 6);
  // A regular file cannot be a parent directory.
  CHECK(CodeOf([&] {
          WriteFile(path / "out.txt", [](std::ostream& o) { o << "x"; });
        }) == ErrorCode::kIo);
  WriteFile(dir / "a" / "b" / "nested.txt", [](std::ostream& o) { o << "x"; });
  CHECK(std::filesystem::exists(dir / "a" / "b" / "nested.txt"));
  CHECK(CodeOf([] { LoadDmos("/nonexistent/dmos.jsonl"); }) == ErrorCode::kIo);
}

}  // namespace
}  // namespace idsqs
