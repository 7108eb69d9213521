#pragma once

// Text instance files and JSON result documents.
//
// Instance file: a header line "rows cols", then one line per row with cols
// decimal entries. Marginals file: whitespace-separated decimals.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "framescale/linalg.hpp"
#include "framescale/trace.hpp"

namespace framescale {

inline constexpr const char* kToolVersion = "0.1.0";

/// Parsed numbers together with the exact decimal text they came from.
struct TextMatrix {
  Matrix values;
  std::vector<std::vector<std::string>> tokens;
};

struct TextVector {
  Vector values;
  std::vector<std::string> tokens;
};

namespace detail {

inline double parse_finite(const std::string& tok, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw InvalidInput(where + ": not a number: '" + tok + "'");
  if (!std::isfinite(v)) throw InvalidInput(where + ": non-finite value '" + tok + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

inline long parse_dim(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || v < 1) throw InvalidInput(where + ": bad dimension '" + tok + "'");
  return v;
}

}  // namespace detail

inline TextMatrix parse_matrix_text(std::istream& in, const std::string& where = "instance") {
  std::vector<std::vector<std::string>> lines;
  for (std::string line; std::getline(in, line);) {
    auto toks = detail::split_ws(line);
    if (!toks.empty()) lines.push_back(std::move(toks));
  }
  if (lines.empty()) throw InvalidInput(where + ": empty file");
  if (lines.front().size() != 2) throw InvalidInput(where + ": header must be 'rows cols'");
  const long rows = detail::parse_dim(lines.front()[0], where);
  const long cols = detail::parse_dim(lines.front()[1], where);
  if (static_cast<long>(lines.size()) - 1 != rows)
    throw InvalidInput(where + ": expected " + std::to_string(rows) + " rows, found " + std::to_string(lines.size() - 1));
  TextMatrix out;
  out.values.resize(rows, cols);
  for (long i = 0; i < rows; ++i) {
    auto& toks = lines[static_cast<std::size_t>(i) + 1];
    if (static_cast<long>(toks.size()) != cols)
      throw InvalidInput(where + ": row " + std::to_string(i) + " has " + std::to_string(toks.size()) + " entries");
    for (long j = 0; j < cols; ++j) out.values(i, j) = detail::parse_finite(toks[static_cast<std::size_t>(j)], where);
    out.tokens.push_back(std::move(toks));
  }
  return out;
}

/// Positive decimals; `expected` < 0 accepts any length.
inline TextVector parse_vector_text(std::istream& in, Index expected, const std::string& where = "marginals") {
  TextVector out;
  for (std::string tok; in >> tok;) out.tokens.push_back(tok);
  if (out.tokens.empty()) throw InvalidInput(where + ": empty file");
  if (expected >= 0 && static_cast<Index>(out.tokens.size()) != expected)
    throw InvalidInput(where + ": expected " + std::to_string(expected) + " entries, found " +
                       std::to_string(out.tokens.size()));
  out.values.resize(static_cast<Index>(out.tokens.size()));
  for (std::size_t j = 0; j < out.tokens.size(); ++j) {
    const double v = detail::parse_finite(out.tokens[j], where);
    if (!(v > 0.0)) throw InvalidInput(where + ": entries must be positive");
    out.values(static_cast<Index>(j)) = v;
  }
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  return in;
}

inline TextMatrix read_matrix_file(const std::string& path) {
  auto in = open_input(path);
  return parse_matrix_text(in, path);
}

inline TextVector read_vector_file(const std::string& path, Index expected) {
  auto in = open_input(path);
  return parse_vector_text(in, expected, path);
}

/// %.17g, enough to round-trip every double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_matrix_text(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_double(m(i, j));
    out << '\n';
  }
}

inline void write_vector_text(std::ostream& out, const Vector& v) {
  for (Index j = 0; j < v.size(); ++j) out << (j ? " " : "") << format_double(v(j));
  out << '\n';
}

/// Serialized outcome of a frame ("z") or matrix ("y") run.
struct ResultDocument {
  std::string status;           // "scaled" | "infeasible"
  std::string scaling_key = "z";
  std::optional<std::vector<double>> scaling;
  std::vector<long long> certificate;  // 0-based
  long long iterations = 0;
  double final_error_sq = 0.0;
  std::optional<std::vector<IterationRecord>> trace;
  nlohmann::json config = nlohmann::json::object();
  std::string version = kToolVersion;
};

inline nlohmann::json trace_record_json(const IterationRecord& r) {
  return {{"error_sq", r.error_sq}, {"gamma", r.gamma},       {"alpha_hat", r.alpha_hat},
          {"progress", r.progress}, {"nd_iters", r.nd_iters}, {"regularized", r.regularized}};
}

inline IterationRecord trace_record_from_json(const nlohmann::json& j) {
  IterationRecord r;
  r.error_sq = j.at("error_sq").get<double>();
  r.gamma = j.at("gamma").get<double>();
  r.alpha_hat = j.at("alpha_hat").get<double>();
  r.progress = j.at("progress").get<double>();
  r.nd_iters = j.at("nd_iters").get<int>();
  r.regularized = j.at("regularized").get<bool>();
  return r;
}

inline nlohmann::json to_json(const ResultDocument& doc) {
  nlohmann::json j = nlohmann::json::object();
  j["status"] = doc.status;
  j[doc.scaling_key] = doc.scaling ? nlohmann::json(*doc.scaling) : nlohmann::json(nullptr);
  j["certificate"] = doc.certificate;
  j["iterations"] = doc.iterations;
  j["final_error_sq"] = doc.final_error_sq;
  if (doc.trace) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : *doc.trace) arr.push_back(trace_record_json(r));
    j["trace"] = std::move(arr);
  }
  j["config"] = doc.config;
  j["version"] = doc.version;
  return j;
}

inline ResultDocument result_from_json(const nlohmann::json& j) {
  try {
    ResultDocument doc;
    doc.status = j.at("status").get<std::string>();
    if (doc.status != "scaled" && doc.status != "infeasible") throw InvalidInput("result: unknown status '" + doc.status + "'");
    if (j.contains("z")) {
      doc.scaling_key = "z";
    } else if (j.contains("y")) {
      doc.scaling_key = "y";
    } else {
      throw InvalidInput("result: missing scaling key 'z' or 'y'");
    }
    const auto& s = j.at(doc.scaling_key);
    if (!s.is_null()) doc.scaling = s.get<std::vector<double>>();
    doc.certificate = j.at("certificate").get<std::vector<long long>>();
    doc.iterations = j.at("iterations").get<long long>();
    doc.final_error_sq = j.at("final_error_sq").get<double>();
    if (j.contains("trace")) {
      std::vector<IterationRecord> tr;
      for (const auto& r : j.at("trace")) tr.push_back(trace_record_from_json(r));
      doc.trace = std::move(tr);
    }
    doc.config = j.at("config");
    doc.version = j.at("version").get<std::string>();
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("result: malformed document: ") + e.what());
  }
}

inline std::string serialize(const ResultDocument& doc) { return to_json(doc).dump(2); }

inline ResultDocument parse_result(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("result: invalid JSON: ") + e.what());
  }
  return result_from_json(j);
}

}  // namespace framescale
