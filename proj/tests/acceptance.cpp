// Runs every experiment at its default size, reruns small configurations
// at two thread counts to check bit-identical output, then prints one
// PASS/FAIL line per criterion. Exit status is nonzero if any fails.
#include "cli.hpp"
#include "csv.hpp"

#include <fstream>
#include <iostream>
#include <iterator>
#include <set>

namespace fs = std::filesystem;
using Args = std::vector<std::string>;

namespace {

struct Job {
  std::string name;
  Args args;
};

// Default-sized runs feeding C1..C12.
const std::vector<Job> kFull = {
    {"landscape", {"landscape"}},
    {"gd-compare", {"gd-compare"}},
    {"flow", {"flow"}},
    {"relusq", {"relusq"}},
    {"multinode", {"multinode"}},
    {"toeplitz", {"toeplitz"}},
    {"sgd", {"sgd"}},
    {"verify-gradients", {"verify-gradients"}},
    {"linear", {"linear"}},
    {"chebyshev", {"chebyshev"}},
};

// Reduced configurations for the thread-count comparison.
const std::vector<Job> kSmall = {
    {"landscape", {"landscape", "--theta-grid", "16", "--points", "20"}},
    {"gd-compare", {"gd-compare", "--points", "50"}},
    {"flow", {"flow", "--inits", "6", "--t-end", "0.5", "--form-grid", "50"}},
    {"relusq", {"relusq", "--points", "100", "--inits", "4", "--t-end", "0.2"}},
    {"multinode", {"multinode", "--inits", "6", "--ratio-starts", "2", "--diag-t-end", "2"}},
    {"toeplitz", {"toeplitz"}},
    {"sgd", {"sgd", "--seeds", "2", "--steps", "100", "--n-train", "500"}},
    {"verify-gradients",
     {"verify-gradients", "--dims", "4", "--n-min", "8", "--n-max", "10", "--trials", "2", "--pointwise-points", "1",
      "--pointwise-n", "20000"}},
    {"linear", {"linear", "--trials", "200", "--designs", "1"}},
    {"chebyshev", {"chebyshev", "--n-max", "8"}},
};

int invoke(Args args, const fs::path& dir, const std::string& threads = {}) {
  args.insert(args.end(), {"--out-dir", dir.string()});
  if (!threads.empty()) args.insert(args.end(), {"--threads", threads});
  return sobolev_cli::run(args, std::cout, std::cerr);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::set<std::string> csv_files(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".csv") out.insert(e.path().filename().string());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::remove_all(out);
  fs::create_directories(out);

  bool ran_all = true;
  for (const Job& j : kFull) {
    std::cout << "running " << j.name << std::endl;
    if (invoke(j.args, out) != 0) {
      std::cerr << j.name << " failed\n";
      ran_all = false;
    }
  }

  {
    sobolev_cli::CsvWriter det(out / "determinism.csv", "subcommand,file,threads_a,threads_b,identical");
    for (const Job& j : kSmall) {
      const fs::path a = out / "determinism" / j.name / "t1";
      const fs::path b = out / "determinism" / j.name / "t4";
      if (invoke(j.args, a, "1") != 0 || invoke(j.args, b, "4") != 0) {
        std::cerr << j.name << " failed in the determinism rerun\n";
        det.row(j.name, "(run)", 1, 4, false);
        continue;
      }
      const auto fa = csv_files(a);
      const auto fb = csv_files(b);
      std::set<std::string> all = fa;
      all.insert(fb.begin(), fb.end());
      for (const std::string& f : all) {
        const bool same = fa.count(f) && fb.count(f) && slurp(a / f) == slurp(b / f);
        det.row(j.name, f, 1, 4, same);
      }
    }
  }

  const nlohmann::json report = sobolev_cli::summarize(out);
  bool all_pass = ran_all;
  for (int n = 1; n <= 13; ++n) {
    const std::string key = "C" + std::to_string(n);
    const nlohmann::json& c = report["criteria"][key];
    const std::string status = c.value("status", "missing");
    const bool pass = status == "pass";
    all_pass = all_pass && pass;
    std::cout << key << ' ' << (pass ? "PASS" : "FAIL");
    if (status == "missing") std::cout << "  missing " << c.value("missing", "");
    if (c.contains("measured")) std::cout << "  " << c["measured"].dump();
    if (c.contains("failures") && !c["failures"].empty()) {
      const auto& f = c["failures"];
      std::cout << "  first failure: " << f.front().get<std::string>();
      if (f.size() > 1) std::cout << " (+" << f.size() - 1 << " more)";
    }
    std::cout << '\n';
  }
  std::cout << report["passed"] << '/' << report["total"] << " criteria passed\n";
  return all_pass ? 0 : 1;
}
