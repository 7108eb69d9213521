// framescale: frame and matrix scaling from the command line.
//
// Exit codes: 0 scaled / success, 3 infeasible (certificate written),
// 1 I/O or numeric failure, 2 verification failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "framescale/framescale.hpp"
#include "framescale/io.hpp"
#include "framescale/verify.hpp"

namespace fs = framescale;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerify = 2;
constexpr int kExitInfeasible = 3;

struct RunOptions {
  std::string input;
  std::string marginals;
  std::string rows;
  std::string cols;
  double eps = 1e-8;
  std::string out;
  std::string trace;
  long long max_iters = 0;
  bool no_regularize = false;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw fs::InvalidInput("cannot write '" + path + "'");
  out << text;
  if (!out) throw fs::InvalidInput("write failed for '" + path + "'");
}

void write_trace_jsonl(const std::string& path, const std::vector<fs::IterationRecord>& trace) {
  std::string text;
  for (const auto& r : trace) text += fs::trace_record_json(r).dump() + "\n";
  write_text(path, text);
}

void emit(const RunOptions& opt, fs::ResultDocument doc, const std::vector<fs::IterationRecord>& trace) {
  if (!opt.trace.empty()) {
    write_trace_jsonl(opt.trace, trace);
    doc.trace = trace;
  }
  const std::string text = fs::serialize(doc) + "\n";
  if (opt.out.empty()) std::cout << text;
  else write_text(opt.out, text);
}

fs::SolverConfig solver_config(const RunOptions& opt) {
  fs::SolverConfig cfg;
  cfg.max_iters = opt.max_iters;
  cfg.regularize = !opt.no_regularize;
  cfg.record_trace = !opt.trace.empty();
  return cfg;
}

nlohmann::json config_echo(const RunOptions& opt, const char* kind, long long max_iters) {
  return {{"kind", kind}, {"eps", opt.eps}, {"max_iters", max_iters}, {"regularize", !opt.no_regularize}};
}

std::vector<long long> to_ll(const fs::IndexSet& t) { return {t.begin(), t.end()}; }

int cmd_frame(const RunOptions& opt) {
  const fs::TextMatrix u = fs::read_matrix_file(opt.input);
  const fs::Frame frame(u.values);
  const fs::TextVector c = fs::read_vector_file(opt.marginals, frame.n());
  const fs::SolverConfig cfg = solver_config(opt);
  const long long cap = cfg.max_iters > 0 ? cfg.max_iters : fs::default_max_iters(frame.n(), opt.eps);
  const fs::ScalingResult res = fs::run(frame, c.values, opt.eps, cfg);

  fs::ResultDocument doc;
  doc.scaling_key = "z";
  doc.iterations = res.iterations;
  doc.final_error_sq = res.final_error_sq;
  doc.config = config_echo(opt, "frame", cap);
  if (res.status == fs::Status::Scaled) {
    doc.status = "scaled";
    doc.scaling = std::vector<double>(res.z.data(), res.z.data() + res.z.size());
  } else {
    doc.status = "infeasible";
    doc.certificate = to_ll(res.certificate);
  }
  emit(opt, doc, res.trace);
  if (res.status == fs::Status::Infeasible) {
    std::cerr << "infeasible: certificate of size " << res.certificate.size() << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_matrix(const RunOptions& opt) {
  const fs::TextMatrix a = fs::read_matrix_file(opt.input);
  const fs::NonnegMatrix mat(a.values);
  const fs::TextVector r = fs::read_vector_file(opt.rows, mat.m());
  const fs::TextVector c = fs::read_vector_file(opt.cols, mat.n());
  const fs::MatrixMarginals mm(r.values, c.values);
  const fs::SolverConfig cfg = solver_config(opt);
  const long long cap = cfg.max_iters > 0 ? cfg.max_iters : fs::default_max_iters(mat.n(), opt.eps);
  const fs::MatrixScalingResult res = fs::run_matrix(mat, mm, opt.eps, cfg);

  fs::ResultDocument doc;
  doc.scaling_key = "y";
  doc.iterations = res.iterations;
  doc.final_error_sq = res.final_error_sq;
  doc.config = config_echo(opt, "matrix", cap);
  if (res.status == fs::Status::Scaled) {
    doc.status = "scaled";
    doc.scaling = std::vector<double>(res.y.data(), res.y.data() + res.y.size());
  } else {
    doc.status = "infeasible";
    doc.certificate = to_ll(res.certificate);
  }
  emit(opt, doc, res.trace);
  if (res.status == fs::Status::Infeasible) {
    std::cerr << "infeasible: Hall violation on " << res.certificate.size() << " columns\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

struct GenOptions {
  std::string kind;
  long long d = 0;
  long long m = 0;
  long long n = 0;
  unsigned long long seed = 0;
  std::string prefix;
};

std::string matrix_text(const fs::Matrix& m) {
  std::ostringstream out;
  fs::write_matrix_text(out, m);
  return out.str();
}

std::string vector_text(const fs::Vector& v) {
  std::ostringstream out;
  fs::write_vector_text(out, v);
  return out.str();
}

int cmd_gen(const GenOptions& opt) {
  fs::Rng rng(opt.seed);
  if (opt.kind == "gaussian") {
    const fs::Matrix u = fs::gaussian_frame(opt.d, opt.n, rng);
    write_text(opt.prefix + ".U.txt", matrix_text(u));
    write_text(opt.prefix + ".c.txt", vector_text(fs::uniform_marginals(opt.d, opt.n)));
  } else if (opt.kind == "infeasible") {
    const fs::PlantedFrame p = fs::planted_infeasible_frame(opt.d, opt.n, rng);
    write_text(opt.prefix + ".U.txt", matrix_text(p.u));
    write_text(opt.prefix + ".c.txt", vector_text(p.c));
  } else if (opt.kind == "bipartite") {
    const long long m = opt.m > 0 ? opt.m : opt.d;
    if (m < 1 || opt.n < 1) throw fs::InvalidInput("gen: bipartite needs --m and --n");
    const fs::Matrix a = fs::bipartite_matrix(m, opt.n, rng);
    write_text(opt.prefix + ".A.txt", matrix_text(a));
    write_text(opt.prefix + ".r.txt",
               vector_text(fs::Vector::Constant(m, static_cast<double>(opt.n) / static_cast<double>(m))));
    write_text(opt.prefix + ".c.txt", vector_text(fs::Vector::Ones(opt.n)));
  } else {
    throw fs::InvalidInput("gen: unknown kind '" + opt.kind + "'");
  }
  return kExitOk;
}

int cmd_verify(const RunOptions& opt, const std::string& result_path) {
  std::ifstream in(result_path);
  if (!in) throw fs::InvalidInput("cannot open '" + result_path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const fs::ResultDocument doc = fs::parse_result(text);

  fs::VerifyOutcome outcome;
  if (doc.scaling_key == "y") {
    if (opt.rows.empty() || opt.cols.empty()) throw fs::InvalidInput("verify: matrix results need --rows and --cols");
    const fs::TextMatrix a = fs::read_matrix_file(opt.input);
    const fs::TextVector r = fs::read_vector_file(opt.rows, a.values.rows());
    const fs::TextVector c = fs::read_vector_file(opt.cols, a.values.cols());
    outcome = fs::verify_matrix_result(doc, a, r, c);
  } else {
    if (opt.marginals.empty()) throw fs::InvalidInput("verify: frame results need --marginals");
    const fs::TextMatrix u = fs::read_matrix_file(opt.input);
    const fs::TextVector c = fs::read_vector_file(opt.marginals, u.values.cols());
    outcome = fs::verify_frame_result(doc, u, c);
  }
  for (const auto& note : outcome.notes) std::cerr << note << "\n";
  if (!outcome.ok) {
    std::cerr << "verify failed: " << outcome.failed_check << "\n";
    return kExitVerify;
  }
  std::cout << "ok\n";
  return kExitOk;
}

struct DemoOptions {
  std::string input;
  unsigned long long seed = 0;
};

// scale to uniform marginals, then learn a random halfspace in the Q metric
int cmd_perceptron(const DemoOptions& opt) {
  const fs::TextMatrix u = fs::read_matrix_file(opt.input);
  const fs::Frame frame(u.values);
  const double d = static_cast<double>(frame.d());
  const double n = static_cast<double>(frame.n());
  const fs::ScalingResult res = fs::run(frame, fs::uniform_marginals(frame.d(), frame.n()), 0.9 * d / (2.0 * n));
  if (res.status != fs::Status::Scaled) {
    std::cerr << "perceptron: frame is not scalable to uniform marginals\n";
    return kExitInfeasible;
  }
  fs::Rng rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  fs::Vector w(frame.d());
  for (fs::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);

  const fs::QMetric q(frame, res.z);
  std::vector<fs::LabeledSample> samples;
  for (fs::Index j = 0; j < frame.n(); ++j) {
    const fs::Vector p = frame.column(j);
    samples.push_back({p, q.inner(w, p) >= 0.0 ? 1 : -1});
  }
  const double gamma = 1.0 / std::sqrt(4.0 * d);
  const fs::PerceptronResult pr = fs::improved_perceptron(samples, q, gamma);
  nlohmann::json out = {{"margin_fraction", fs::margin_fraction(frame, res.z, w)},
                        {"gamma", gamma},
                        {"updates", pr.updates},
                        {"seed_instance", pr.seed},
                        {"v", std::vector<double>(pr.v.data(), pr.v.data() + pr.v.size())}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

void add_run_flags(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--eps", opt.eps, "target error")->check(CLI::PositiveNumber);
  cmd->add_option("--out", opt.out, "result JSON path (stdout when omitted)");
  cmd->add_option("--trace", opt.trace, "per-iteration JSONL path; also embeds the trace in the result");
  cmd->add_option("--max-iters", opt.max_iters, "iteration cap (default 40 n^3 ln(n/eps))");
  cmd->add_flag("--no-regularize", opt.no_regularize, "skip range regularization");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame and matrix scaling"};
  app.set_version_flag("--version", fs::kToolVersion);
  app.require_subcommand(1);

  RunOptions frame_opt;
  auto* frame_cmd = app.add_subcommand("frame", "scale a frame to column marginals");
  frame_cmd->add_option("--input", frame_opt.input, "frame U (d x n)")->required();
  frame_cmd->add_option("--marginals", frame_opt.marginals, "marginals c")->required();
  add_run_flags(frame_cmd, frame_opt);

  RunOptions matrix_opt;
  auto* matrix_cmd = app.add_subcommand("matrix", "scale a nonnegative matrix to row and column sums");
  matrix_cmd->add_option("--input", matrix_opt.input, "matrix A (m x n)")->required();
  matrix_cmd->add_option("--rows", matrix_opt.rows, "row sums r")->required();
  matrix_cmd->add_option("--cols", matrix_opt.cols, "column sums c")->required();
  add_run_flags(matrix_cmd, matrix_opt);

  GenOptions gen_opt;
  auto* gen_cmd = app.add_subcommand("gen", "write a seeded random instance");
  gen_cmd->add_option("kind", gen_opt.kind, "gaussian | infeasible | bipartite")->required();
  gen_cmd->add_option("--d", gen_opt.d, "frame rows");
  gen_cmd->add_option("--m", gen_opt.m, "matrix rows");
  gen_cmd->add_option("--n", gen_opt.n, "columns")->required();
  gen_cmd->add_option("--seed", gen_opt.seed, "random seed");
  gen_cmd->add_option("--prefix", gen_opt.prefix, "output path prefix")->required();

  RunOptions verify_opt;
  std::string result_path;
  auto* verify_cmd = app.add_subcommand("verify", "re-check a result document");
  verify_cmd->add_option("--result", result_path, "result JSON")->required();
  verify_cmd->add_option("--input", verify_opt.input, "instance matrix")->required();
  verify_cmd->add_option("--marginals", verify_opt.marginals, "frame marginals");
  verify_cmd->add_option("--rows", verify_opt.rows, "matrix row sums");
  verify_cmd->add_option("--cols", verify_opt.cols, "matrix column sums");

  DemoOptions demo_opt;
  auto* demo_cmd = app.add_subcommand("perceptron", "scale a frame, then learn a random halfspace in the Q metric");
  demo_cmd->add_option("--input", demo_opt.input, "frame U (d x n)")->required();
  demo_cmd->add_option("--seed", demo_opt.seed, "random seed for the hidden halfspace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*frame_cmd) return cmd_frame(frame_opt);
    if (*matrix_cmd) return cmd_matrix(matrix_opt);
    if (*gen_cmd) return cmd_gen(gen_opt);
    if (*verify_cmd) return cmd_verify(verify_opt, result_path);
    if (*demo_cmd) return cmd_perceptron(demo_opt);
  } catch (const fs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
