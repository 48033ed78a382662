// End-to-end checks of the CLI binary: exit codes, determinism of the
// generate -> train -> eval pipeline, and the stream wire format.  The
// binary path arrives via the ASSM_CLI environment variable.

#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "[ok] " << what << "\n";
  } else {
    std::cout << "[FAIL] " << what << "\n";
    ++g_failures;
  }
}

std::string cli_path() {
  const char* env = std::getenv("ASSM_CLI");
  if (env == nullptr) {
    std::cerr << "ASSM_CLI not set\n";
    std::exit(1);
  }
  return env;
}

int run(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture(const std::string& command, int* exit_code = nullptr) {
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return "";
  std::string output;
  std::array<char, 4096> buffer;
  size_t count;
  while ((count = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    output.append(buffer.data(), count);
  }
  const int status = pclose(pipe);
  if (exit_code != nullptr) {
    *exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  return output;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

int main() {
  const std::string cli = cli_path();
  const fs::path dir =
      fs::temp_directory_path() / ("assm_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string d = dir.string();
  const std::string quiet = " 2>/dev/null";

  // Small dataset config to keep the pipeline fast.
  {
    std::ofstream cfg(d + "/gen.cfg");
    cfg << "gen.n_train = 60\ngen.n_test = 20\ngen.seq_len = 60\n";
    std::ofstream tcfg(d + "/train.cfg");
    tcfg << "train.epochs = 2\ntrain.batch_size = 16\nmodel.state_dim = 4\n";
  }

  check(run(cli + " generate --seed 9 --config " + d + "/gen.cfg --out " + d +
            "/data" + quiet) == 0,
        "generate exits 0");
  check(fs::exists(d + "/data.train.csv") && fs::exists(d + "/data.test.csv") &&
            fs::exists(d + "/data.meta.json"),
        "generate writes the three dataset files");

  check(run(cli + " train --seed 9 --config " + d + "/train.cfg --data " + d +
            "/data --checkpoint " + d + "/model.ckpt --out " + d +
            "/train.json" + quiet) == 0,
        "train exits 0");
  check(fs::exists(d + "/model.ckpt"), "train writes a checkpoint");

  check(run(cli + " eval --data " + d + "/data --checkpoint " + d +
            "/model.ckpt --out " + d + "/eval.json" + quiet) == 0,
        "eval exits 0");
  const std::string eval_report = slurp(d + "/eval.json");
  check(eval_report.find("\"assm\"") != std::string::npos &&
            eval_report.find("\"kf\"") != std::string::npos,
        "eval report covers both methods");

  // Determinism: the same pipeline again gives byte-identical artifacts.
  check(run(cli + " generate --seed 9 --config " + d + "/gen.cfg --out " + d +
            "/data2" + quiet) == 0,
        "second generate exits 0");
  check(slurp(d + "/data.train.csv") == slurp(d + "/data2.train.csv"),
        "generate is byte-deterministic");
  check(run(cli + " train --seed 9 --config " + d + "/train.cfg --data " + d +
            "/data2 --checkpoint " + d + "/model2.ckpt --out " + d +
            "/train2.json" + quiet) == 0,
        "second train exits 0");
  check(slurp(d + "/model.ckpt") == slurp(d + "/model2.ckpt"),
        "checkpoints are byte-identical");
  check(slurp(d + "/train.json") == slurp(d + "/train2.json"),
        "train reports are byte-identical");
  check(run(cli + " eval --data " + d + "/data2 --checkpoint " + d +
            "/model2.ckpt --out " + d + "/eval2.json" + quiet) == 0,
        "second eval exits 0");
  check(slurp(d + "/eval.json") == slurp(d + "/eval2.json"),
        "eval reports are byte-identical");

  // Stream mode: verdicts come back one line per sample.
  {
    std::ofstream stream_in(d + "/stream.ndjson");
    stream_in << R"({"t":0,"x":[0.1]})" << "\n"
              << R"({"t":1,"x":[0.2],"y":0})" << "\n"
              << R"({"t":2,"x":[9.5]})" << "\n";
  }
  int code = -1;
  const std::string verdicts =
      capture("cat " + d + "/stream.ndjson | " + cli + " stream --checkpoint " +
                  d + "/model.ckpt --threshold 1.0 2>/dev/null",
              &code);
  check(code == 0, "stream exits 0");
  int lines = 0;
  std::istringstream vs(verdicts);
  std::string line;
  bool spike_alarmed = false;
  while (std::getline(vs, line)) {
    if (line.empty()) continue;
    ++lines;
    if (line.find("\"t\":2") != std::string::npos &&
        line.find("\"is_anomaly\":true") != std::string::npos) {
      spike_alarmed = true;
    }
  }
  check(lines == 3, "stream emits one verdict per sample");
  check(spike_alarmed, "stream flags the obvious spike");

  // Plot artifacts.
  check(run(cli + " plot --data " + d + "/data --checkpoint " + d +
            "/model.ckpt --out " + d + "/trace.svg" + quiet) == 0,
        "plot exits 0");
  check(fs::exists(d + "/trace.svg") && fs::exists(d + "/trace.csv"),
        "plot writes svg and csv twin");

  // Exit codes.
  check(run(cli + " eval --data " + d + "/missing --checkpoint " + d +
            "/model.ckpt" + quiet) == 4,
        "missing dataset exits 4");
  {
    std::ofstream bad(d + "/bad.train.csv");
    bad << "seq_id,t,x_0,y\n0,0,1.0,7\n";
    std::ofstream meta(d + "/bad.meta.json");
    meta << slurp(d + "/data.meta.json");
    std::ofstream test(d + "/bad.test.csv");
    test << slurp(d + "/data.test.csv");
  }
  check(run(cli + " train --data " + d + "/bad --checkpoint " + d +
            "/x.ckpt" + quiet) == 2,
        "invalid label exits 2");
  {
    std::string bytes = slurp(d + "/model.ckpt");
    bytes[40] = static_cast<char>(bytes[40] ^ 0x01);
    std::ofstream out(d + "/corrupt.ckpt", std::ios::binary);
    out << bytes;
  }
  check(run(cli + " eval --data " + d + "/data --checkpoint " + d +
            "/corrupt.ckpt" + quiet) == 4,
        "corrupt checkpoint exits 4");
  check(run(cli + " nonsense" + quiet) == 2, "unknown subcommand exits 2");

  std::error_code ec;
  fs::remove_all(dir, ec);

  if (g_failures > 0) {
    std::cout << g_failures << " check(s) failed\n";
    return 1;
  }
  std::cout << "all CLI pipeline checks passed\n";
  return 0;
}
