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

// idsqs command line. Talks to the library through the C API only.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>

#include "CLI11.hpp"
#include "idsqs/idsqs.h"

namespace {

// Failure inside a subcommand; main prints it and exits nonzero.
struct CommandError {
  std::string what;
};

void Check(idsqs_status status, const std::string& context) {
  if (status == IDSQS_OK) return;
  throw CommandError{context + ": " + idsqs_status_name(status) + ": " +
                     idsqs_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, Deleter<T, Free>>;

using Config = Handle<idsqs_config, idsqs_config_free>;
using Table = Handle<idsqs_table, idsqs_table_free>;
using Truth = Handle<idsqs_truth, idsqs_truth_free>;
using Cleansing = Handle<idsqs_cleansing, idsqs_cleansing_free>;
using Outliers = Handle<idsqs_outliers, idsqs_outliers_free>;
using Recon = Handle<idsqs_reconstruction, idsqs_reconstruction_free>;
using Dmos = Handle<idsqs_dmos, idsqs_dmos_free>;
using Boot = Handle<idsqs_bootstrap, idsqs_bootstrap_free>;
using Fits = Handle<idsqs_fits, idsqs_fits_free>;
using Jnd = Handle<idsqs_jnd, idsqs_jnd_free>;
using Alignment = Handle<idsqs_alignment, idsqs_alignment_free>;
using Service = Handle<idsqs_service, idsqs_service_free>;

void PrintOwned(char* text) {
  if (text == nullptr) return;
  std::fputs(text, stdout);
  std::fputc('\n', stdout);
  idsqs_string_free(text);
}

Config LoadConfig(const std::string& path) {
  idsqs_config* c = nullptr;
  Check(idsqs_config_load(path.c_str(), &c), "loading " + path);
  return Config(c);
}

Table LoadTable(const std::string& path, const std::string& config_path) {
  Config config;
  if (!config_path.empty()) config = LoadConfig(config_path);
  idsqs_table* t = nullptr;
  Check(idsqs_table_load(path.c_str(), config.get(), &t), "loading " + path);
  return Table(t);
}

void PrintCounts(const idsqs_table* table) {
  size_t ratings = 0, instances = 0, subjects = 0, questions = 0;
  Check(idsqs_table_counts(table, &ratings, &instances, &subjects, &questions),
        "counting");
  std::printf("%zu ratings, %zu batch instances, %zu subjects, %zu questions\n",
              ratings, instances, subjects, questions);
}

// "host:port" or a bare port on 127.0.0.1.
std::pair<std::string, int> SplitListen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  std::string host = "127.0.0.1";
  std::string_view port_text = listen;
  if (colon != std::string::npos) {
    host = listen.substr(0, colon);
    port_text = std::string_view(listen).substr(colon + 1);
  }
  int port = -1;
  const auto [end, ec] = std::from_chars(
      port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || end != port_text.data() + port_text.size() ||
      port < 1 || port > 65535 || host.empty()) {
    throw CommandError{"invalid --listen '" + listen +
                       "', expected host:port"};
  }
  return {host, port};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IDSQS study runner and analysis pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(idsqs_version()));

  // init-config
  auto* init = app.add_subcommand("init-config",
                                  "Write the default study configuration");
  uint64_t init_seed = 0;
  std::string init_out;
  init->add_option("--seed", init_seed, "Seed for batch composition");
  init->add_option("--out", init_out, "Output config file")->required();

  // validate-config
  auto* validate =
      app.add_subcommand("validate-config", "Check a study configuration");
  std::string validate_config, validate_base;
  bool validate_no_assets = false;
  validate->add_option("--config", validate_config)->required();
  validate->add_option("--base-dir", validate_base,
                       "Directory for a relative asset_dir (default: the "
                       "config's directory)");
  validate->add_flag("--no-assets", validate_no_assets,
                     "Skip the asset existence check");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Generate ratings from a synthetic rater population");
  std::string sim_config, sim_out, sim_truth;
  uint64_t sim_seed = 0;
  idsqs_population pop;
  idsqs_population_default(&pop);
  simulate->add_option("--config", sim_config,
                       "Study config (default: generated from --seed)");
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--diligent", pop.diligent);
  simulate->add_option("--clickers", pop.random_clickers);
  simulate->add_option("--bias-sd", pop.bias_sd);
  simulate->add_option("--sd-lo", pop.residual_sd_lo);
  simulate->add_option("--sd-hi", pop.residual_sd_hi);
  simulate->add_option("--batches-per-subject", pop.batches_per_subject);
  simulate->add_option("--out", sim_out, "Rating table output")->required();
  simulate->add_option("--truth-out", sim_truth, "Ground truth output");

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "Validate a rating table and write it in normal form");
  std::string ingest_in, ingest_config, ingest_out;
  ingest->add_option("--in", ingest_in)->required();
  ingest->add_option("--config", ingest_config);
  ingest->add_option("--out", ingest_out);

  // clean
  auto* clean = app.add_subcommand("clean", "Trap-based data cleansing");
  std::string clean_in, clean_config, clean_out, clean_table;
  int clean_bins = 100;
  clean->add_option("--in", clean_in)->required();
  clean->add_option("--config", clean_config);
  clean->add_option("--bins", clean_bins, "Otsu histogram bins");
  clean->add_option("--out", clean_out, "Report output")->required();
  clean->add_option("--out-table", clean_table, "Kept instances output");

  // outliers
  auto* outliers = app.add_subcommand("outliers", "Correlation outlier removal");
  std::string out_in, out_config, out_out, out_table;
  outliers->add_option("--in", out_in)->required();
  outliers->add_option("--config", out_config);
  outliers->add_option("--out", out_out, "Report output")->required();
  outliers->add_option("--out-table", out_table, "Kept instances output");

  // reconstruct
  auto* reconstruct =
      app.add_subcommand("reconstruct", "Bias-corrected MOS and DMOS");
  std::string rec_in, rec_config, rec_out, rec_dmos, rec_truth;
  double rec_epsilon = 1e-6;
  int rec_max_iter = 1000;
  reconstruct->add_option("--in", rec_in)->required();
  reconstruct->add_option("--config", rec_config);
  reconstruct->add_option("--epsilon", rec_epsilon);
  reconstruct->add_option("--max-iter", rec_max_iter);
  reconstruct->add_option("--out", rec_out, "MOS/bias output")->required();
  reconstruct->add_option("--dmos-out", rec_dmos, "DMOS output");
  reconstruct->add_option("--truth", rec_truth,
                          "Simulation truth for recovery metrics");

  // bootstrap
  auto* bootstrap =
      app.add_subcommand("bootstrap", "Bootstrap confidence intervals on DMOS");
  std::string boot_in, boot_config, boot_out, boot_series;
  int boot_replicates = 1000;
  double boot_level = 0.95;
  uint64_t boot_seed = 0;
  unsigned boot_threads = 0;
  bootstrap->add_option("--in", boot_in)->required();
  bootstrap->add_option("--config", boot_config);
  bootstrap->add_option("--replicates", boot_replicates);
  bootstrap->add_option("--level", boot_level);
  bootstrap->add_option("--seed", boot_seed);
  bootstrap->add_option("--threads", boot_threads);
  bootstrap->add_option("--out", boot_out, "Interval output")->required();
  bootstrap->add_option("--series-out", boot_series, "Plot series CSV");

  // fit-beta
  auto* fit = app.add_subcommand("fit-beta", "Per-question Beta fits");
  std::string fit_in, fit_config, fit_out, fit_scatter;
  double fit_significance = 0.05;
  fit->add_option("--in", fit_in)->required();
  fit->add_option("--config", fit_config);
  fit->add_option("--significance", fit_significance);
  fit->add_option("--out", fit_out, "Fit output")->required();
  fit->add_option("--scatter-out", fit_scatter, "alpha/beta scatter CSV");

  // align
  auto* align = app.add_subcommand("align", "Map DMOS onto a JND scale");
  std::string align_dmos, align_jnd, align_grouping = "pooled", align_out,
                                     align_scatter;
  align->add_option("--in", align_dmos, "DMOS file")->required();
  align->add_option("--jnd", align_jnd, "JND reference file")->required();
  align->add_option("--grouping", align_grouping)
      ->check(CLI::IsMember(
          {"per-source", "pooled", "pooled-per-source-mapping"}));
  align->add_option("--out", align_out, "Alignment output")->required();
  align->add_option("--scatter-out", align_scatter, "Scatter CSV");

  // report
  auto* report = app.add_subcommand("report", "Run a full pipeline manifest");
  std::string manifest;
  report->add_option("--manifest", manifest)->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the study service");
  std::string serve_config, serve_listen = "127.0.0.1:8080", serve_log,
                            serve_base;
  uint64_t serve_seed = 0;
  serve->add_option("--config", serve_config)->required();
  serve->add_option("--listen", serve_listen, "host:port");
  serve->add_option("--log", serve_log, "Event log (default: events.jsonl "
                                        "next to the config)");
  serve->add_option("--base-dir", serve_base);
  auto* serve_seed_opt =
      serve->add_option("--seed", serve_seed, "Seed for a new event log");

  CLI11_PARSE(app, argc, argv);

  auto dir_of = [](const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".")
                                      : path.substr(0, slash);
  };

  try {
    if (*init) {
      idsqs_config* c = nullptr;
      Check(idsqs_config_generate(init_seed, &c), "generating config");
      Config config(c);
      Check(idsqs_config_save(config.get(), init_out.c_str()), "writing");
      std::printf("wrote %s\n", init_out.c_str());
    } else if (*validate) {
      Config config = LoadConfig(validate_config);
      const std::string base =
          validate_base.empty() ? dir_of(validate_config) : validate_base;
      char* text = nullptr;
      size_t count = 0;
      Check(idsqs_config_validate(config.get(), base.c_str(),
                                  validate_no_assets ? 0 : 1, &text, &count),
            "validating");
      PrintOwned(text);
      if (count > 0) {
        std::fprintf(stderr, "%zu violation(s)\n", count);
        return 1;
      }
    } else if (*simulate) {
      Config config;
      if (sim_config.empty()) {
        idsqs_config* c = nullptr;
        Check(idsqs_config_generate(sim_seed, &c), "generating config");
        config.reset(c);
      } else {
        config = LoadConfig(sim_config);
      }
      idsqs_table* t = nullptr;
      idsqs_truth* g = nullptr;
      Check(idsqs_simulate(config.get(), &pop, sim_seed, &t, &g), "simulate");
      Table table(t);
      Truth truth(g);
      Check(idsqs_table_save(table.get(), sim_out.c_str()), "writing");
      if (!sim_truth.empty()) {
        Check(idsqs_truth_save(truth.get(), sim_truth.c_str()), "writing");
      }
      PrintCounts(table.get());
    } else if (*ingest) {
      Table table = LoadTable(ingest_in, ingest_config);
      PrintCounts(table.get());
      if (!ingest_out.empty()) {
        Check(idsqs_table_save(table.get(), ingest_out.c_str()), "writing");
      }
    } else if (*clean) {
      Table table = LoadTable(clean_in, clean_config);
      idsqs_cleansing* r = nullptr;
      Check(idsqs_cleanse(table.get(), clean_bins, &r), "clean");
      Cleansing result(r);
      Check(idsqs_cleansing_write(result.get(), clean_out.c_str()), "writing");
      if (!clean_table.empty()) {
        idsqs_table* kept = nullptr;
        Check(idsqs_cleansing_apply(result.get(), table.get(), &kept), "clean");
        Table k(kept);
        Check(idsqs_table_save(k.get(), clean_table.c_str()), "writing");
      }
      char* text = nullptr;
      Check(idsqs_cleansing_summary(result.get(), &text), "summary");
      PrintOwned(text);
    } else if (*outliers) {
      Table table = LoadTable(out_in, out_config);
      idsqs_outliers* r = nullptr;
      Check(idsqs_remove_outliers(table.get(), &r), "outliers");
      Outliers result(r);
      Check(idsqs_outliers_write(result.get(), out_out.c_str()), "writing");
      if (!out_table.empty()) {
        idsqs_table* kept = nullptr;
        Check(idsqs_outliers_apply(result.get(), table.get(), &kept),
              "outliers");
        Table k(kept);
        Check(idsqs_table_save(k.get(), out_table.c_str()), "writing");
      }
      char* text = nullptr;
      Check(idsqs_outliers_summary(result.get(), &text), "summary");
      PrintOwned(text);
    } else if (*reconstruct) {
      Table table = LoadTable(rec_in, rec_config);
      idsqs_reconstruction* r = nullptr;
      Check(idsqs_reconstruct(table.get(), rec_epsilon, rec_max_iter, &r),
            "reconstruct");
      Recon result(r);
      Check(idsqs_reconstruction_write(result.get(), rec_out.c_str()),
            "writing");
      if (!rec_dmos.empty()) {
        idsqs_dmos* d = nullptr;
        Check(idsqs_dmos_compute(result.get(), table.get(), &d), "dmos");
        Dmos dmos(d);
        Check(idsqs_dmos_write(dmos.get(), rec_dmos.c_str()), "writing");
      }
      char* text = nullptr;
      Check(idsqs_reconstruction_summary(result.get(), &text), "summary");
      PrintOwned(text);
      if (!rec_truth.empty()) {
        idsqs_truth* g = nullptr;
        Check(idsqs_truth_load(rec_truth.c_str(), &g), "loading truth");
        Truth truth(g);
        double rmse = 0, plcc = 0, bias_corr = 0;
        Check(idsqs_reconstruction_recovery(result.get(), truth.get(),
                                            table.get(), &rmse, &plcc,
                                            &bias_corr),
              "recovery");
        std::printf("recovery: rmse %.4f, plcc %.4f, bias correlation %.4f\n",
                    rmse, plcc, bias_corr);
      }
    } else if (*bootstrap) {
      Table table = LoadTable(boot_in, boot_config);
      idsqs_bootstrap* b = nullptr;
      Check(idsqs_bootstrap_run(table.get(), boot_replicates, boot_level,
                                boot_seed, boot_threads, &b),
            "bootstrap");
      Boot ci(b);
      Check(idsqs_bootstrap_write(ci.get(), boot_out.c_str()), "writing");
      if (!boot_series.empty()) {
        idsqs_reconstruction* r = nullptr;
        Check(idsqs_reconstruct(table.get(), 1e-6, 1000, &r), "reconstruct");
        Recon result(r);
        idsqs_dmos* d = nullptr;
        Check(idsqs_dmos_compute(result.get(), table.get(), &d), "dmos");
        Dmos dmos(d);
        Check(idsqs_dmos_write_series(dmos.get(), ci.get(),
                                      boot_series.c_str()),
              "writing");
      }
      char* text = nullptr;
      Check(idsqs_bootstrap_summary(ci.get(), &text), "summary");
      PrintOwned(text);
    } else if (*fit) {
      Table table = LoadTable(fit_in, fit_config);
      idsqs_fits* f = nullptr;
      Check(idsqs_fit_beta_all(table.get(), fit_significance, &f), "fit-beta");
      Fits fits(f);
      Check(idsqs_fits_write(fits.get(), fit_out.c_str()), "writing");
      if (!fit_scatter.empty()) {
        Check(idsqs_fits_write_scatter(fits.get(), fit_scatter.c_str()),
              "writing");
      }
      char* text = nullptr;
      Check(idsqs_fits_summary(fits.get(), &text), "summary");
      PrintOwned(text);
    } else if (*align) {
      idsqs_dmos* d = nullptr;
      Check(idsqs_dmos_load(align_dmos.c_str(), &d), "loading " + align_dmos);
      Dmos dmos(d);
      idsqs_jnd* j = nullptr;
      Check(idsqs_jnd_load(align_jnd.c_str(), &j), "loading " + align_jnd);
      Jnd jnd(j);
      idsqs_alignment* a = nullptr;
      Check(idsqs_align(dmos.get(), jnd.get(), align_grouping.c_str(), &a),
            "align");
      Alignment result(a);
      Check(idsqs_alignment_write(result.get(), align_out.c_str()), "writing");
      if (!align_scatter.empty()) {
        Check(idsqs_alignment_write_scatter(result.get(),
                                            align_scatter.c_str()),
              "writing");
      }
      char* text = nullptr;
      Check(idsqs_alignment_summary(result.get(), &text), "summary");
      PrintOwned(text);
    } else if (*report) {
      char* text = nullptr;
      Check(idsqs_pipeline_run(manifest.c_str(), &text), "report");
      std::fputs(text, stdout);
      idsqs_string_free(text);
    } else if (*serve) {
      Config config = LoadConfig(serve_config);
      const std::string log = serve_log.empty()
                                  ? dir_of(serve_config) + "/events.jsonl"
                                  : serve_log;
      const auto [host, port] = SplitListen(serve_listen);
      idsqs_service* s = nullptr;
      Check(idsqs_service_open(config.get(), log.c_str(),
                               serve_seed_opt->count() > 0 ? 1 : 0,
                               serve_seed, &s),
            "opening service");
      Service service(s);
      const std::string base =
          serve_base.empty() ? dir_of(serve_config) : serve_base;
      std::fprintf(stderr, "serving on %s:%d, event log %s\n", host.c_str(),
                   port, log.c_str());
      Check(idsqs_service_serve(service.get(), base.c_str(), host.c_str(),
                                port),
            "serve");
    }
  } catch (const CommandError& e) {
    std::fprintf(stderr, "idsqs %s: %s\n",
                 app.get_subcommands().front()->get_name().c_str(),
                 e.what.c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "idsqs: %s\n", e.what());
    return 1;
  }
  return 0;
}
