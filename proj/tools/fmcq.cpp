// fmcq: command line front end for the configuration engine.
#include <csignal>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "fmcq/analysis.hpp"
#include "fmcq/bench.hpp"
#include "fmcq/csp.hpp"
#include "fmcq/diagnosis.hpp"
#include "fmcq/io.hpp"
#include "fmcq/representations.hpp"
#include "fmcq/service.hpp"

namespace {

using namespace fmcq;

struct Common {
  std::string model;
  std::string format;
  std::string repr = "per-feature";
  std::string require;
  std::uint64_t limit = 1;
};

ModelDocument load(const Common& c) {
  std::optional<ModelFormat> f;
  if (!c.format.empty()) f = parse_format(c.format);
  return load_model(c.model, f);
}

std::string show(const FeatureModel& fm, const Configuration& conf) {
  std::string out;
  for (std::size_t i = 0; i < fm.size(); ++i) {
    if (i) out += ' ';
    out += fm.feature(i).id + "=" + std::to_string(conf.values[i]);
  }
  return out;
}

std::string show(const FeatureModel& fm, const std::vector<Binding>& bs) {
  std::string out = "{";
  for (std::size_t k = 0; k < bs.size(); ++k) {
    if (k) out += ", ";
    out += fm.feature(bs[k].feature).id + "=" + std::to_string(bs[k].value);
  }
  return out + "}";
}

std::string show(const FeatureModel& fm, const std::set<std::string>& ids) {
  std::vector<std::string> v(ids.begin(), ids.end());
  std::sort(v.begin(), v.end(), [&](auto& a, auto& b) { return fm.index_of(a) < fm.index_of(b); });
  std::string out;
  for (const auto& id : v) out += (out.empty() ? "" : " ") + id;
  return out.empty() ? "-" : out;
}

// Visits solutions of the selected representation.
void each_solution(const ConstraintSet& cf, ReprChoice choice, const Requirements& cr, std::optional<std::uint64_t> limit,
                   const std::function<bool(const Configuration&)>& visit) {
  if (choice == ReprChoice::kCsp) {
    std::uint64_t n = 0;
    csp_enumerate(make_csp(cf, resolve(cf.model(), cr)), [&](const Configuration& c) {
      ++n;
      return visit(c) && (!limit || n < *limit);
    });
    return;
  }
  Representation repr = choice == ReprChoice::kAllConfigs  ? build_all_configs(cf)
                        : choice == ReprChoice::kPerFeature ? build_per_feature(cf, PerFeatureOptions::all())
                                                            : build_per_constraint(cf, PerConstraintOptions{true});
  enumerate(repr, ConfigTask{cr, {}, limit}, visit);
}

int run_solve(const Common& c) {
  const ModelDocument doc = load(c);
  const ConstraintSet cf = translate(doc.model);
  const Requirements cr = parse_requirements(c.require);
  resolve(doc.model, cr);
  std::uint64_t found = 0;
  if (c.limit > 0)
    each_solution(cf, parse_repr(c.repr), cr, c.limit, [&](const Configuration& conf) {
      if (found++ == 0) std::cout << "SAT\n";
      std::cout << show(doc.model, conf) << '\n';
      return true;
    });
  if (!found) std::cout << "UNSAT\n";
  return 0;
}

int run_count(const Common& c) {
  const ModelDocument doc = load(c);
  const ConstraintSet cf = translate(doc.model);
  const Requirements cr = parse_requirements(c.require);
  const ReprChoice choice = parse_repr(c.repr);
  std::uint64_t n = 0;
  if (choice == ReprChoice::kCsp) {
    n = csp_count(make_csp(cf, resolve(doc.model, cr)));
  } else {
    Representation repr = choice == ReprChoice::kAllConfigs  ? build_all_configs(cf)
                          : choice == ReprChoice::kPerFeature ? build_per_feature(cf, PerFeatureOptions::all())
                                                              : build_per_constraint(cf, PerConstraintOptions{true});
    n = count(repr, ConfigTask{cr, {}, std::nullopt});
  }
  std::cout << n << '\n';
  return 0;
}

int run_diagnose(const Common& c, std::size_t max) {
  const ModelDocument doc = load(c);
  const ConstraintSet cf = translate(doc.model);
  const Requirements cr = parse_requirements(c.require);
  DiagnoseOptions opts;
  opts.max_results = max;
  const DiagnosisReport report = diagnose_model(cf, cr, opts);
  std::cout << "scanned " << report.scanned << " configurations (" << report.source
            << (report.complete ? ", complete" : ", partial") << ")\n";
  if (!report.diagnoses.empty() && report.diagnoses.front().delta.empty()) {
    std::cout << "consistent: no diagnosis needed\n";
    return 0;
  }
  for (std::size_t i = 0; i < report.diagnoses.size(); ++i) {
    const Diagnosis& d = report.diagnoses[i];
    std::cout << "delta_" << i + 1 << " = " << show(doc.model, d.delta) << " -> " << show(doc.model, d.suggested)
              << '\n';
  }
  return 0;
}

int run_analyze(const Common& c) {
  const ModelDocument doc = load(c);
  const FeatureModel& fm = doc.model;
  const ConstraintSet cf = translate(fm);
  const AnalysisResult a = analyze(cf);
  std::cout << "features        " << fm.size() << '\n'
            << "leaf features   " << leaf_features(fm).size() << '\n'
            << "cross-tree      " << fm.ctcs().size() << '\n'
            << "void            " << (a.void_model ? "yes" : "no") << '\n'
            << "dead            " << show(fm, a.dead) << '\n'
            << "false optional  " << show(fm, a.false_optional) << '\n'
            << "core            " << show(fm, a.core) << '\n'
            << "configurations  " << (a.configuration_count ? std::to_string(*a.configuration_count) : "-") << '\n'
            << "constraints\n"
            << cf.to_string();
  return 0;
}

struct BenchArgs {
  std::vector<std::string> models;
  std::vector<std::string> approaches;
  std::uint64_t seed = 141982;
  std::size_t samples = 25000;
  std::size_t warmup = 5;
  std::size_t reps = 50;
  std::string out = "table";
};

int run_bench(const Common& c, const BenchArgs& b) {
  std::vector<Approach> approaches;
  for (const auto& a : b.approaches) approaches.push_back(parse_approach(a));
  if (approaches.empty()) approaches = kAllApproaches;
  std::optional<ModelFormat> f;
  if (!c.format.empty()) f = parse_format(c.format);

  std::vector<BenchReport> reports;
  for (const std::string& path : b.models) {
    const ModelDocument doc = load_model(path, f);
    const ConstraintSet cf = translate(doc.model);
    SamplePlan plan;
    plan.seed = b.seed;
    plan.sample_count = b.samples;
    const auto samples = sample_requirements(doc.model, plan);
    const auto probes = systematic_select(
        samples, [&](const Requirements& cr) { return csp_solve(make_csp(cf, resolve(doc.model, cr))).has_value(); },
        plan);
    BenchOptions opts;
    opts.warmup = b.warmup;
    opts.reps = b.reps;
    reports.push_back(run_benchmark(cf, std::filesystem::path(path).stem().string(), probes, approaches, opts));
  }
  std::cout << (b.out == "csv" ? render_csv(reports) : render_table(reports));
  return 0;
}

HttpServer* g_server = nullptr;

int run_serve(const Common& c, const std::string& host, int port) {
  Service service;
  if (!c.model.empty()) {
    const ModelDocument doc = load(c);
    std::cout << "loaded model " << service.add_model(doc.model) << " from " << c.model << '\n';
  }
  HttpServer server(service);
  const int bound = server.bind(host, port);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "listening on http://" << host << ':' << bound << std::endl;
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fmcq: feature model configuration with conjunctive queries"};
  app.require_subcommand(1);
  Common common;
  BenchArgs bench;
  std::size_t max_diagnoses = 10;
  std::string host = "127.0.0.1";
  int port = 8080;

  auto add_model = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--model", common.model, "model file (SXFM or native)");
    if (required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--format", common.format, "sxfm or native (default: detect)")
        ->check(CLI::IsMember({"sxfm", "native"}));
  };
  auto add_query = [&](CLI::App* sub) {
    sub->add_option("--repr", common.repr, "all, per-feature, per-constraint or csp")
        ->check(CLI::IsMember({"all", "all-configs", "per-feature", "per-constraint", "csp"}));
    sub->add_option("--require", common.require, "requirements, e.g. s=1,n=1");
  };

  auto* solve = app.add_subcommand("solve", "find configurations satisfying the requirements");
  add_model(solve, true);
  add_query(solve);
  solve->add_option("--limit", common.limit, "number of configurations to print");

  auto* count = app.add_subcommand("count", "count configurations satisfying the requirements");
  add_model(count, true);
  add_query(count);

  auto* diagnose = app.add_subcommand("diagnose", "derive diagnoses for inconsistent requirements");
  add_model(diagnose, true);
  diagnose->add_option("--require", common.require, "requirements, e.g. t=1,n=1");
  diagnose->add_option("--limit", max_diagnoses, "maximum number of diagnoses");

  auto* analyze = app.add_subcommand("analyze", "dead, false-optional and core features");
  add_model(analyze, true);

  auto* bench_cmd = app.add_subcommand("bench", "run the benchmark protocol");
  bench_cmd->add_option("--model", bench.models, "model files (repeatable)")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--format", common.format, "sxfm or native (default: detect)")
      ->check(CLI::IsMember({"sxfm", "native"}));
  bench_cmd->add_option("--repr", bench.approaches, "approaches to time (repeatable; default all four)");
  bench_cmd->add_option("--seed", bench.seed, "sampling seed");
  bench_cmd->add_option("--samples", bench.samples, "number of sampled requirement sets");
  bench_cmd->add_option("--warmup", bench.warmup, "discarded runs per probe");
  bench_cmd->add_option("--reps", bench.reps, "timed runs per probe");
  bench_cmd->add_option("--out", bench.out, "csv or table")->check(CLI::IsMember({"csv", "table"}));

  auto* serve = app.add_subcommand("serve", "start the HTTP service");
  add_model(serve, false);
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "listen port (0 picks a free one)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return run_solve(common);
    if (*count) return run_count(common);
    if (*diagnose) return run_diagnose(common, max_diagnoses);
    if (*analyze) return run_analyze(common);
    if (*bench_cmd) return run_bench(common, bench);
    if (*serve) return run_serve(common, host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (const auto* r = dynamic_cast<const RequestError*>(&e))
      for (const auto& p : r->problems()) std::cerr << "  " << p << '\n';
    return 2;
  }
  return 0;
}
