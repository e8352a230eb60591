#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ctbayes/cli.hpp"
#include "test_util.hpp"

using namespace ctbayes;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Invocation {
  int code;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ctbayes");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(is, line);)
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  return cells;
}

/// Tiny config file plus its dataset, generated through the CLI.
struct Fixture {
  fs::path root, config, data;

  Fixture() : root(testing::scratch_dir("cli")), config(root / "tiny.json"), data(root / "data") {
    save_config(testing::tiny_config(data, ""), config.string());
    const auto r = invoke({"gen-data", "-c", config.string()});
    REQUIRE(r.code == cli::kExitOk);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"train", "--no-such-flag"}).code == cli::kExitUsage);
  CHECK(invoke({"bogus"}).code == cli::kExitUsage);
  CHECK(invoke({"train", "--profile", "huge"}).code == cli::kExitUsage);
  CHECK(invoke({"eval", "--split", "holdout", "--checkpoint", "x"}).code == cli::kExitUsage);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
}

TEST_CASE("gen-data") {
  auto& f = fixture();
  const auto m = load_manifest(f.data);
  for (const auto& d : {"head", "abdomen"})
    for (const auto& split : kSplits) CHECK(m.count(d, split) > 0);

  const auto again = f.root / "data_again";
  const auto r = invoke({"gen-data", "-c", f.config.string(), "--data-dir", again.string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("train=") != std::string::npos);
  const auto m2 = load_manifest(again);
  for (const auto& [domain, splits] : m.slices)
    for (const auto& [split, records] : splits)
      for (size_t i = 0; i < records.size(); ++i)
        CHECK(records[i].ldct_hash == m2.slices.at(domain).at(split)[i].ldct_hash);

  const auto blocked = f.root / "blocker";
  std::ofstream(blocked) << "file";
  CHECK(invoke({"gen-data", "-c", f.config.string(), "--data-dir", (blocked / "sub").string()}).code ==
        cli::kExitRuntime);
}

TEST_CASE("train on a missing dataset fails without a checkpoint") {
  auto& f = fixture();
  const auto run = f.root / "orphan_run";
  const auto r = invoke({"train", "-c", f.config.string(), "--data-dir", (f.root / "absent").string(), "--run-dir",
                         run.string(), "-q"});
  CHECK(r.code == cli::kExitRuntime);
  CHECK_FALSE(r.err.empty());
  CHECK_FALSE(fs::exists(run / "checkpoints"));
}

TEST_CASE("train, eval and report") {
  auto& f = fixture();
  const auto run = f.root / "run";
  const auto r = invoke({"train", "-c", f.config.string(), "--run-dir", run.string(), "--beta1", "5", "-q"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("\"beta1\": 5.0") != std::string::npos);
  CHECK(load_config((run / "config.json").string()).beta1 == 5.0);
  const auto ckpt = run / "checkpoints" / "best.pt";
  REQUIRE(fs::exists(ckpt));

  SUBCASE("eval is deterministic and writes mean and std") {
    const auto out_root = f.root / "evals";
    const auto a = invoke({"eval", "--checkpoint", ckpt.string(), "--out-root", out_root.string()});
    const auto b = invoke({"eval", "--checkpoint", ckpt.string(), "--out-root", out_root.string()});
    REQUIRE(a.code == cli::kExitOk);
    REQUIRE(b.code == cli::kExitOk);
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(out_root)) dirs.push_back(e.path());
    REQUIRE(dirs.size() == 2);
    const auto ja = json::parse(std::ifstream(dirs[0] / "summary.json"));
    const auto jb = json::parse(std::ifstream(dirs[1] / "summary.json"));
    CHECK(ja == jb);
    for (const char* m : {"psnr", "ssim", "gmsd", "dss"}) {
      CHECK(ja.at(m).at("mean").is_number());
      CHECK(ja.at(m).at("std").is_number());
    }
    CHECK(read_lines(dirs[0] / "metrics.csv").size() == 1 + 2);
    CHECK(fs::exists(dirs[0] / "config.json"));
  }

  SUBCASE("report contract") {
    const auto out = f.root / "report";
    const auto rep = invoke({"report", run.string(), "--out", out.string()});
    REQUIRE(rep.code == cli::kExitOk);
    const auto curves = read_lines(out / "run_loss_curves.csv");
    REQUIRE(curves.size() == 1 + 2);
    CHECK(curves[0] == "l1,pl,kl_enc,kl_dec,bnua,rda");
    CHECK(split_csv(curves[1]).size() == 6);

    const auto scatter = read_lines(out / "discrepancy_scatter.csv");
    CHECK(scatter.size() == 1 + read_epoch_log(run / "epoch_log.csv").size());

    // Density integral per (domain, kind) series.
    std::map<std::string, double> integral;
    const auto pdf = read_lines(out / "run_residual_pdf.csv");
    REQUIRE(pdf.size() > 1);
    std::vector<double> centers;
    for (size_t i = 1; i < pdf.size(); ++i) centers.push_back(std::stod(split_csv(pdf[i])[2]));
    const double width = centers.size() > 1 ? std::abs(centers[1] - centers[0]) : 0.0;
    for (size_t i = 1; i < pdf.size(); ++i) {
      const auto c = split_csv(pdf[i]);
      integral[c[0] + "/" + c[1]] += std::stod(c[3]) * width;
    }
    CHECK(integral.size() == 4);
    for (const auto& [series, total] : integral) CHECK(std::abs(total - 1.0) <= 1e-6);

    for (const auto& name : {"run_loss_curves.svg", "run_residual_pdf.svg", "discrepancy_scatter.svg"})
      CHECK(fs::exists(out / name));
  }

  SUBCASE("malformed log is rejected with its row number") {
    const auto bad = f.root / "bad_run";
    fs::create_directories(bad);
    {
      std::ofstream os(bad / "epoch_log.csv");
      os << kEpochLogHeader << "\n1,2,3\n";
    }
    const auto rep = invoke({"report", bad.string(), "--out", (f.root / "bad_report").string()});
    CHECK(rep.code == cli::kExitRuntime);
    CHECK(rep.err.find("row 2") != std::string::npos);
  }

  SUBCASE("resume through the CLI continues the same run directory") {
    const auto r2 = invoke({"train", "-c", f.config.string(), "--epochs", "3", "--resume",
                            (run / "checkpoints" / "last.pt").string(), "-q"});
    REQUIRE(r2.code == cli::kExitOk);
    CHECK(read_epoch_log(run / "epoch_log.csv").size() == 3);
  }
}

TEST_CASE("ablation lattice") {
  const auto base = testing::tiny_config("", "");
  const auto lattice = cli::ablation_lattice(base);
  CHECK(std::string(lattice[0].name) == "deterministic");
  CHECK(lattice[0].freeze_sigma);
  CHECK(lattice[0].beta1 == 0.0);
  CHECK(lattice[0].beta2 == 0.0);
  CHECK_FALSE(lattice[1].freeze_sigma);
  CHECK(lattice[2].beta1 == base.beta1);
  CHECK(lattice[2].beta2 == 0.0);
  CHECK(lattice[3].beta1 == 0.0);
  CHECK(lattice[3].beta2 == base.beta2);
  CHECK(lattice[4].beta1 == base.beta1);
  CHECK(lattice[4].beta2 == base.beta2);

  const auto dir = testing::scratch_dir("ablation_table");
  std::vector<cli::AblationRow> rows;
  for (uint64_t seed : {0, 1})
    for (const auto& s : lattice) rows.push_back({s.name, seed, 1, 20.0 + seed, 0.5, 0.1, 0.2, 0.0, 0.0});
  cli::write_ablation_table(rows, dir / "t.csv");
  const auto lines = read_lines(dir / "t.csv");
  CHECK(lines[0] == "setting,seed,best_epoch,psnr,ssim,gmsd,dss,val_bnua_disc,residual_w1");
  CHECK(lines.size() == 1 + 10 + 5);
}
