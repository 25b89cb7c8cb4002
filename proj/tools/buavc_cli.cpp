#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "buavc/scenario_io.hpp"
#include "buavc/verify.hpp"

using namespace buavc;
namespace fs = std::filesystem;

namespace {

// Exit code contract: 0 clean, 1 I/O or validation failure, 2 a run ended
// with a ground-truth collision, 3 robots still underway at the step limit,
// 4 a verification bound was violated.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCollision = 2;
constexpr int kExitTimeout = 3;
constexpr int kExitBoundViolated = 4;

struct RunArtifacts {
  Metrics metrics;
  bool collided = false;
  bool timed_out = false;
};

RunArtifacts execute_run(const Scenario& s, const fs::path& dir) {
  fs::create_directories(dir);
  World w(s);
  const auto t0 = std::chrono::steady_clock::now();
  RunArtifacts out;
  out.metrics = w.run();
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::ofstream(dir / "trajectory.csv", std::ios::binary)
      << trajectory_csv(w);
  std::ofstream(dir / "metrics.json", std::ios::binary)
      << metrics_summary(out.metrics, s, wall);
  for (size_t i = 0; i < s.robots.size(); ++i) {
    out.collided = out.collided || w.status(int(i)) == RobotStatus::Collided;
    out.timed_out = out.timed_out || w.status(int(i)) == RobotStatus::Active;
  }
  return out;
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
  std::vector<uint64_t> seeds;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      if (!cur.empty()) seeds.push_back(std::stoull(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return seeds;
}

void print_report(const VerifyReport& r) {
  std::printf("%s: empirical=%.6g bound=%.6g margin=%.6g %s\n",
              r.kind.c_str(), r.empirical, r.bound, r.margin,
              r.pass ? "PASS" : "FAIL");
  std::printf("  %s\n", r.detail.c_str());
}

std::string csv_header() {
  return "seed,collision_rate,min_inter_robot_distance,"
         "min_robot_obstacle_distance,avg_travelled_distance,"
         "completion_time,deadlock_count,empty_cell_steps,steps";
}

std::string csv_row(const std::string& tag, const Metrics& m) {
  char buf[360];
  std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g",
                tag.c_str(), m.collision_rate, m.min_inter_robot_distance,
                m.min_robot_obstacle_distance, m.avg_travelled_distance,
                m.completion_time, double(m.deadlock_count),
                double(m.empty_cell_steps), double(m.steps));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Buffered uncertainty-aware Voronoi cell simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
    if (needs_scenario) {
      cmd->add_option("scenario", scenario_path, "Scenario document path")
          ->required();
    }
    cmd->add_option("--out", out_dir, "Output directory")
        ->envname("BUAVC_OUT_DIR");
    cmd->add_option("--override", overrides,
                    "Scenario override key=value (repeatable), dotted keys "
                    "reach nested fields");
    cmd->add_option("--seed", seed, "Replaces the scenario seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* run = app.add_subcommand(
      "run", "Simulate one scenario; writes trajectory.csv and metrics.json");
  add_common(run, true);

  CLI::App* batch = app.add_subcommand(
      "batch",
      "Run a scenario across seeds; per-seed outputs plus batch.csv and "
      "batch_summary.json");
  add_common(batch, true);
  std::string seeds_text;
  int repeat = 10;
  batch->add_option("--seeds", seeds_text,
                    "Comma-separated seed list (wins over --repeat)");
  batch->add_option("--repeat", repeat,
                    "Number of consecutive seeds starting at the scenario "
                    "seed (default 10)");

  CLI::App* gen = app.add_subcommand(
      "gen", "Write a generated scenario document (stdout or --out-file)");
  std::string kind;
  gen->add_option("kind", kind, "circle | asymmetric | random")->required();
  int n = 8;
  double radius = 4.0;
  double density = 0.10;
  std::string base_path;
  std::string out_file = "-";
  gen->add_option("--n", n, "Robot count");
  gen->add_option("--radius", radius, "Circle radius [m] (circle)");
  gen->add_option("--density", density, "Obstacle area fraction (random)");
  gen->add_option("--base", base_path,
                  "Scenario document supplying the template robot and "
                  "workspace");
  gen->add_option("--out-file", out_file, "Output path, - for stdout");
  gen->add_option("--override", overrides,
                  "Base scenario override key=value (repeatable)");
  gen->add_option("--seed", seed, "Layout and scenario seed")
      ->each([&](const std::string&) { seed_set = true; });

  CLI::App* verify = app.add_subcommand(
      "verify", "Monte Carlo checks of the probabilistic guarantees");
  std::string vkind;
  verify
      ->add_option("kind", vkind,
                   "lemma1 | lemma2 | theorem2 | theorem3 | separator-minimax")
      ->required();
  int samples = 1000000;
  verify->add_option("--samples", samples, "Sample count (minimum 10000)");
  verify->add_option("--seed", seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitError;
  }

  try {
    if (run->parsed()) {
      Scenario s = load_scenario(scenario_path, overrides);
      if (seed_set) s.seed = seed;
      const RunArtifacts art = execute_run(s, out_dir);
      if (art.collided) return kExitCollision;
      if (art.timed_out) return kExitTimeout;
      return kExitOk;
    }

    if (batch->parsed()) {
      const Scenario base = load_scenario(scenario_path, overrides);
      std::vector<uint64_t> seeds;
      if (!seeds_text.empty()) {
        seeds = parse_seed_list(seeds_text);
      } else {
        const uint64_t s0 = seed_set ? seed : base.seed;
        for (int i = 0; i < repeat; ++i) seeds.push_back(s0 + uint64_t(i));
      }
      if (seeds.empty()) throw std::invalid_argument("batch: no seeds");

      fs::create_directories(out_dir);
      std::vector<Metrics> rows;
      int failed = 0;
      std::ostringstream table;
      table << csv_header() << "\n";
      for (uint64_t sd : seeds) {
        Scenario s = base;
        s.seed = sd;
        try {
          const RunArtifacts art = execute_run(
              s, fs::path(out_dir) / ("seed_" + std::to_string(sd)));
          rows.push_back(art.metrics);
          table << csv_row(std::to_string(sd), art.metrics) << "\n";
        } catch (const std::exception& e) {
          ++failed;
          std::fprintf(stderr, "seed %llu failed: %s\n",
                       static_cast<unsigned long long>(sd), e.what());
        }
      }

      Metrics mean, var;
      auto fold = [&](auto get, double Metrics::*out_mean,
                      double Metrics::*out_var) {
        double m = 0.0;
        for (const Metrics& r : rows) m += get(r);
        m /= std::max<size_t>(rows.size(), 1);
        double v = 0.0;
        for (const Metrics& r : rows) v += sq(get(r) - m);
        v /= std::max<size_t>(rows.size(), 1);
        mean.*out_mean = m;
        var.*out_var = std::sqrt(v);
      };
      fold([](const Metrics& m) { return m.collision_rate; },
           &Metrics::collision_rate, &Metrics::collision_rate);
      fold([](const Metrics& m) { return m.min_inter_robot_distance; },
           &Metrics::min_inter_robot_distance,
           &Metrics::min_inter_robot_distance);
      fold([](const Metrics& m) { return m.min_robot_obstacle_distance; },
           &Metrics::min_robot_obstacle_distance,
           &Metrics::min_robot_obstacle_distance);
      fold([](const Metrics& m) { return m.avg_travelled_distance; },
           &Metrics::avg_travelled_distance, &Metrics::avg_travelled_distance);
      fold([](const Metrics& m) { return m.completion_time; },
           &Metrics::completion_time, &Metrics::completion_time);
      table << csv_row("mean", mean) << "\n";

      std::ofstream(fs::path(out_dir) / "batch.csv", std::ios::binary)
          << table.str();
      std::ostringstream summary;
      summary << "{\n  \"runs\": " << rows.size()
              << ",\n  \"failed\": " << failed << ",\n  \"mean\": {"
              << "\"collision_rate\": " << mean.collision_rate
              << ", \"avg_travelled_distance\": "
              << mean.avg_travelled_distance
              << ", \"completion_time\": " << mean.completion_time
              << "},\n  \"std\": {"
              << "\"collision_rate\": " << var.collision_rate
              << ", \"avg_travelled_distance\": " << var.avg_travelled_distance
              << ", \"completion_time\": " << var.completion_time << "}\n}\n";
      std::ofstream(fs::path(out_dir) / "batch_summary.json",
                    std::ios::binary)
          << summary.str();
      return failed == 0 ? kExitOk : kExitError;
    }

    if (gen->parsed()) {
      Scenario base;
      if (!base_path.empty()) {
        base = load_scenario(base_path, overrides);
      } else {
        base.workspace_lo = Vec(2);
        base.workspace_lo << -5.0, -5.0;
        base.workspace_hi = Vec(2);
        base.workspace_hi << 5.0, 5.0;
        if (!overrides.empty()) {
          base = parse_scenario(serialize_scenario(base), overrides);
        }
      }
      Scenario out;
      if (kind == "circle") {
        out = gen_antipodal_circle(n, radius, base);
      } else if (kind == "asymmetric") {
        out = gen_asymmetric_swap(n, seed_set ? seed : base.seed, base);
      } else if (kind == "random") {
        out = gen_random_moving(n, density, seed_set ? seed : base.seed,
                                base);
      } else {
        throw std::invalid_argument("unknown generator kind '" + kind + "'");
      }
      if (seed_set) out.seed = seed;
      const std::string text = serialize_scenario(out);
      if (out_file == "-") {
        std::cout << text;
      } else {
        std::ofstream f(out_file, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out_file);
        f << text;
      }
      return kExitOk;
    }

    if (verify->parsed()) {
      if (samples < 10000) {
        throw std::invalid_argument("verify: need at least 10000 samples");
      }
      std::vector<VerifyReport> reports;
      if (vkind == "lemma1") {
        reports.push_back(verify_shadow_coverage(0.1, 2, samples, seed));
        reports.push_back(verify_shadow_coverage(0.1, 3, samples, seed + 1));
      } else if (vkind == "lemma2") {
        reports.push_back(verify_halfspace_mass(samples, seed));
      } else if (vkind == "theorem2") {
        reports.push_back(verify_pair_collision_bound(samples, seed));
      } else if (vkind == "theorem3") {
        reports.push_back(verify_obstacle_collision_bound(samples, seed));
      } else if (vkind == "separator-minimax") {
        reports.push_back(verify_separator_minimax(100, seed));
      } else {
        throw std::invalid_argument("unknown verify kind '" + vkind + "'");
      }
      bool all_pass = true;
      for (const VerifyReport& r : reports) {
        print_report(r);
        all_pass = all_pass && r.pass;
      }
      return all_pass ? kExitOk : kExitBoundViolated;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
