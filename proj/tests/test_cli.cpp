// End-to-end command-line behavior: exit codes, file outputs, determinism.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "voltwatch/cli.hpp"
#include "voltwatch/kernels.hpp"

namespace fs = std::filesystem;
using namespace voltwatch;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("voltwatch-cli-" + std::to_string(counter.fetch_add(1)) + "-" +
            std::to_string(static_cast<unsigned>(::getpid())));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// Small fleet: 3 vehicles x 160 samples; window 16 -> 10 windows/vehicle.
std::vector<std::string> gen_args(const std::string& out_path,
                                  const std::string& extra_seed = "42",
                                  std::size_t fault_vehicles = 0) {
  return {"gen-data",          "--out",
          out_path,            "--vehicles",
          "3",                 "--samples",
          "160",               "--seed",
          extra_seed,          "--fault-vehicles",
          std::to_string(fault_vehicles), "--fault-duration",
          "40"};
}

const std::vector<std::string> kTinyModel = {
    "--window", "16", "--hidden", "4", "--k",     "1",
    "--epochs", "2",  "--batch",  "8", "--layers", "1"};

std::vector<std::string> cat(std::vector<std::string> a,
                             const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("help text and usage errors") {
  std::string out, err;
  CHECK(run_cli({"--help"}, &out, &err) == cli::kExitOk);
  CHECK(out.find("gen-data") != std::string::npos);
  CHECK(out.find("diagnose") != std::string::npos);

  CHECK(run_cli({}, &out, &err) == cli::kExitUsage);
  CHECK(run_cli({"train", "--bogus-flag"}, &out, &err) == cli::kExitUsage);
  CHECK(err.find("error:") != std::string::npos);

  // Required options enforced by the parser.
  CHECK(run_cli({"train"}, &out, &err) == cli::kExitUsage);

  // Unknown kernel backend is rejected after parsing.
  TempDir dir;
  const auto telemetry = dir.file("t.csv");
  REQUIRE(run_cli(gen_args(telemetry)) == cli::kExitOk);
  CHECK(run_cli({"--kernels", "bogus", "analyze-correlation", "--data",
                 telemetry, "--window", "16"},
                &out, &err) == cli::kExitUsage);
  CHECK(err.find("kernel backend") != std::string::npos);
  kernels::select_backend("auto");
}

TEST_CASE("gen-data is deterministic and writes default label files") {
  TempDir dir;
  const auto a = dir.file("a.csv");
  const auto b = dir.file("b.csv");
  const auto c = dir.file("c.csv");

  std::string out;
  REQUIRE(run_cli(gen_args(a, "42", 1), &out) == cli::kExitOk);
  CHECK(out.find("wrote 3 vehicles") != std::string::npos);
  REQUIRE(run_cli(gen_args(b, "42", 1)) == cli::kExitOk);
  REQUIRE(run_cli(gen_args(c, "43", 1)) == cli::kExitOk);

  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(slurp(dir.file("a.labels.csv")) == slurp(dir.file("b.labels.csv")));
  CHECK(fs::exists(dir.file("c.labels.csv")));

  // Fleet-level validation surfaces as a usage error.
  std::string err;
  CHECK(run_cli({"gen-data", "--out", dir.file("d.csv"), "--vehicles", "3",
                 "--samples", "160", "--fault-vehicles", "9",
                 "--fault-duration", "40"},
                nullptr, &err) == cli::kExitUsage);
  CHECK(err.find("--fault-vehicles") != std::string::npos);
  CHECK(run_cli({"gen-data", "--out", dir.file("e.csv"), "--samples", "160",
                 "--fault-duration", "500"},
                nullptr, &err) == cli::kExitUsage);
  CHECK(run_cli({"gen-data", "--out", dir.file("f.csv"), "--fault-kind",
                 "bogus", "--fault-duration", "40"},
                nullptr, &err) == cli::kExitUsage);
}

TEST_CASE("missing or malformed data files exit with the data code") {
  TempDir dir;
  std::string err;
  CHECK(run_cli({"train", "--data", dir.file("absent.csv"), "--model",
                 dir.file("m.bin")},
                nullptr, &err) == cli::kExitData);
  CHECK(err.find("data error:") != std::string::npos);

  // A window longer than every stream leaves nothing to train on.
  const auto telemetry = dir.file("t.csv");
  REQUIRE(run_cli(gen_args(telemetry)) == cli::kExitOk);
  CHECK(run_cli({"train", "--data", telemetry, "--model", dir.file("m.bin"),
                 "--window", "500"},
                nullptr, &err) == cli::kExitData);
  CHECK(err.find("no windows") != std::string::npos);

  // Loading garbage as a model file is a data error too.
  std::ofstream(dir.file("junk.bin")) << "not a model";
  CHECK(run_cli({"diagnose", "--model", dir.file("junk.bin"), "--data",
                 telemetry},
                nullptr, &err) == cli::kExitData);
}

TEST_CASE("train, diagnose, and export-recon round trip") {
  TempDir dir;
  const auto telemetry = dir.file("t.csv");
  const auto model = dir.file("model.bin");
  const auto history = dir.file("loss.csv");
  REQUIRE(run_cli(gen_args(telemetry)) == cli::kExitOk);

  std::string out, err;
  REQUIRE(run_cli(cat({"train", "--data", telemetry, "--model", model,
                       "--loss-history", history},
                      kTinyModel),
                  &out, &err) == cli::kExitOk);
  CHECK(out.find("trained on 30 windows") != std::string::npos);
  CHECK(out.find("model saved to") != std::string::npos);

  const auto hist = slurp(history);
  CHECK(hist.rfind("epoch,loss\n", 0) == 0);
  CHECK(count_lines(hist) == 3);  // header + one row per epoch

  // Diagnose: one scored row per non-overlapping window.
  const auto scores = dir.file("scores.csv");
  REQUIRE(run_cli({"diagnose", "--model", model, "--data", telemetry, "--out",
                   scores},
                  &out, &err) == cli::kExitOk);
  const auto sc = slurp(scores);
  CHECK(sc.rfind("vehicle_id,start_timestamp,end_timestamp,score,flag\n", 0) ==
        0);
  CHECK(count_lines(sc) == 31);
  CHECK(err.find("flagged") != std::string::npos);

  // Reconstruction dump: header + one row per window step.
  const auto recon = dir.file("recon.csv");
  REQUIRE(run_cli({"export-recon", "--model", model, "--data", telemetry,
                   "--out", recon, "--index", "2"},
                  &out, &err) == cli::kExitOk);
  const auto rc = slurp(recon);
  CHECK(rc.rfind("step,voltage,voltage_hat\n", 0) == 0);
  CHECK(count_lines(rc) == 17);
  CHECK(err.find("window score") != std::string::npos);

  CHECK(run_cli({"export-recon", "--model", model, "--data", telemetry,
                 "--vehicle", "ghost"},
                nullptr, &err) == cli::kExitData);
  CHECK(run_cli({"export-recon", "--model", model, "--data", telemetry,
                 "--index", "999"},
                nullptr, &err) == cli::kExitUsage);
  CHECK(err.find("out of range") != std::string::npos);
}

TEST_CASE("analyze-correlation emits one correlation per channel") {
  TempDir dir;
  const auto telemetry = dir.file("t.csv");
  REQUIRE(run_cli(gen_args(telemetry)) == cli::kExitOk);

  std::string out;
  REQUIRE(run_cli({"analyze-correlation", "--data", telemetry, "--window",
                   "16"},
                  &out) == cli::kExitOk);
  CHECK(out.rfind("channel,rho\n", 0) == 0);
  CHECK(count_lines(out) == 5);
  CHECK(out.find("voltage,") != std::string::npos);
  CHECK(out.find("soc,") != std::string::npos);
}

TEST_CASE("eval reports per-fold metrics plus mean and std rows") {
  TempDir dir;
  const auto telemetry = dir.file("t.csv");
  const auto labels = dir.file("t.labels.csv");
  REQUIRE(run_cli(gen_args(telemetry, "42", 1)) == cli::kExitOk);

  const auto report = dir.file("report.csv");
  const auto roc = dir.file("roc.csv");
  std::string out, err;
  REQUIRE(run_cli(cat({"eval", "--data", telemetry, "--labels", labels,
                       "--report", report, "--roc", roc, "--folds", "3"},
                      kTinyModel),
                  &out, &err) == cli::kExitOk);

  const auto rep = slurp(report);
  CHECK(rep.rfind("fold,accuracy,precision_0,recall_0,f1_0,precision_1,"
                  "recall_1,f1_1,auc,lambda\n",
                  0) == 0);
  CHECK(count_lines(rep) == 6);  // header + 3 folds + mean + std
  CHECK(rep.find("mean,") != std::string::npos);
  CHECK(rep.find("std,") != std::string::npos);

  const auto roc_text = slurp(roc);
  CHECK(roc_text.rfind("fpr,tpr\n", 0) == 0);
  CHECK(count_lines(roc_text) >= 3);

  // Same invocation, same bytes.
  const auto report2 = dir.file("report2.csv");
  REQUIRE(run_cli(cat({"eval", "--data", telemetry, "--labels", labels,
                       "--report", report2, "--folds", "3"},
                      kTinyModel)) == cli::kExitOk);
  CHECK(slurp(report2) == rep);
}

TEST_CASE("grid-search emits one row per axis cell") {
  TempDir dir;
  const auto telemetry = dir.file("t.csv");
  const auto labels = dir.file("t.labels.csv");
  REQUIRE(run_cli(gen_args(telemetry, "42", 1)) == cli::kExitOk);

  std::string out;
  REQUIRE(run_cli(cat({"grid-search", "--data", telemetry, "--labels", labels,
                       "--folds", "2", "--grid-layers", "1", "--grid-neurons",
                       "3,5"},
                      kTinyModel),
                  &out) == cli::kExitOk);
  CHECK(out.rfind("layers,neurons,mean_auc\n", 0) == 0);
  CHECK(count_lines(out) == 3);
  CHECK(out.find("1,3,") != std::string::npos);
  CHECK(out.find("1,5,") != std::string::npos);
}

TEST_CASE("invalid hyperparameters are usage errors") {
  TempDir dir;
  const auto telemetry = dir.file("t.csv");
  REQUIRE(run_cli(gen_args(telemetry)) == cli::kExitOk);

  std::string err;
  CHECK(run_cli(cat({"train", "--data", telemetry, "--model",
                     dir.file("m.bin"), "--quantile", "1.5"},
                    kTinyModel),
                nullptr, &err) == cli::kExitUsage);
  CHECK(err.find("error:") != std::string::npos);

  // More interaction channels than the telemetry has.
  CHECK(run_cli(cat({"train", "--data", telemetry, "--model",
                     dir.file("m.bin"), "--k", "9"},
                    {"--window", "16", "--hidden", "4", "--epochs", "1"}),
                nullptr, &err) == cli::kExitUsage);

  // Ablation flags compose: disabling physics implies the rest, so the
  // combination is accepted rather than rejected.
  CHECK(run_cli(cat({"train", "--data", telemetry, "--model",
                     dir.file("m2.bin"), "--no-physics", "--no-attention"},
                    kTinyModel),
                nullptr, &err) == cli::kExitOk);
}

TEST_CASE("scalar and auto kernel backends write identical models") {
  TempDir dir;
  const auto telemetry = dir.file("t.csv");
  REQUIRE(run_cli(gen_args(telemetry)) == cli::kExitOk);

  const auto model_scalar = dir.file("scalar.bin");
  const auto model_auto = dir.file("auto.bin");
  REQUIRE(run_cli(cat({"--kernels", "scalar", "train", "--data", telemetry,
                       "--model", model_scalar},
                      kTinyModel)) == cli::kExitOk);
  REQUIRE(run_cli(cat({"--kernels", "auto", "train", "--data", telemetry,
                       "--model", model_auto},
                      kTinyModel)) == cli::kExitOk);
  CHECK(slurp(model_scalar) == slurp(model_auto));
  kernels::select_backend("auto");
}

TEST_CASE("config files supply subcommand options") {
  TempDir dir;
  const auto telemetry = dir.file("t.csv");
  REQUIRE(run_cli(gen_args(telemetry)) == cli::kExitOk);

  const auto cfg = dir.file("run.ini");
  std::ofstream(cfg) << "kernels=scalar\n"
                        "[train]\n"
                        "window=16\n"
                        "hidden=4\n"
                        "k=1\n"
                        "epochs=2\n"
                        "batch=8\n";

  const auto model = dir.file("model.bin");
  std::string out;
  REQUIRE(run_cli({"--config", cfg, "train", "--data", telemetry, "--model",
                   model},
                  &out) == cli::kExitOk);
  CHECK(out.find("trained on 30 windows") != std::string::npos);

  // The configured window size shows up downstream.
  const auto recon = dir.file("recon.csv");
  REQUIRE(run_cli({"export-recon", "--model", model, "--data", telemetry,
                   "--out", recon}) == cli::kExitOk);
  CHECK(count_lines(slurp(recon)) == 17);
  kernels::select_backend("auto");
}
