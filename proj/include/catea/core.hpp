#pragma once

// Shared domain types: observational samples, datasets, non-adherence modes,
// and the nuisance-value record consumed by the adjustment formulas.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace catea {

// Base classes used to map failures onto CLI exit codes: config errors are
// caller mistakes (exit 2), data errors are properties of the data (exit 3).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NonAdherenceMode { OneSided, TwoSided };
enum class OutcomeKind { Binary, Continuous };

inline const char* to_string(NonAdherenceMode m) {
  return m == NonAdherenceMode::OneSided ? "one_sided" : "two_sided";
}

inline NonAdherenceMode mode_from_string(const std::string& s) {
  if (s == "one_sided") return NonAdherenceMode::OneSided;
  if (s == "two_sided") return NonAdherenceMode::TwoSided;
  throw ConfigError("unknown non-adherence mode: " + s);
}

// One observational record: features x, binary assignment t, binary intake a,
// outcome y.
struct Sample {
  std::vector<double> x;
  int t = 0;
  int a = 0;
  double y = 0.0;
};

struct Dataset {
  std::vector<Sample> samples;
  std::size_t feature_dim = 0;
  NonAdherenceMode mode = NonAdherenceMode::TwoSided;
  OutcomeKind outcome_kind = OutcomeKind::Continuous;
  // Ground-truth per-sample assignment effect; present only for synthetic data.
  std::optional<std::vector<double>> true_catea;

  std::size_t size() const { return samples.size(); }
};

// Per-individual nuisance triple: propensity pi = E[T|x], intake
// a_given_t[t] = E[A|T=t,x], outcome y_given_at[a][t] = E[Y|A=a,T=t,x].
// Under one-sided non-adherence a_given_t[0] must be 0 and y_given_at[1][0]
// is carried but unused.
struct NuisanceValues {
  double pi = 0.5;
  double a_given_t[2] = {0.0, 0.0};
  double y_given_at[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

struct DimensionMismatch : DataError {
  using DataError::DataError;
};
struct OneSidedViolation : DataError {
  using DataError::DataError;
};
struct NonBinaryOutcome : DataError {
  using DataError::DataError;
};

// Checks every Dataset invariant; throws on the first violation. Idempotent
// and side-effect free.
inline void validate_dataset(const Dataset& ds) {
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const Sample& s = ds.samples[i];
    if (s.x.size() != ds.feature_dim)
      throw DimensionMismatch("sample " + std::to_string(i) + " has dimension " +
                              std::to_string(s.x.size()) + ", expected " +
                              std::to_string(ds.feature_dim));
    if ((s.t != 0 && s.t != 1) || (s.a != 0 && s.a != 1))
      throw DataError("sample " + std::to_string(i) + " has non-binary t or a");
    if (ds.mode == NonAdherenceMode::OneSided && s.a == 1 && s.t == 0)
      throw OneSidedViolation("sample " + std::to_string(i) +
                              " has a=1,t=0 under one-sided non-adherence");
    if (ds.outcome_kind == OutcomeKind::Binary && s.y != 0.0 && s.y != 1.0)
      throw NonBinaryOutcome("sample " + std::to_string(i) + " has y=" +
                             std::to_string(s.y) + " in a binary-outcome dataset");
  }
  if (ds.true_catea && ds.true_catea->size() != ds.samples.size())
    throw DimensionMismatch("true_catea length " + std::to_string(ds.true_catea->size()) +
                            " does not match sample count " + std::to_string(ds.samples.size()));
}

namespace detail {
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

// Column CSV with header x0,...,x{d-1},t,a,y[,catea]. Floats are written with
// 17 significant digits so a write/read round trip is value-exact.
inline void write_dataset_csv(const Dataset& ds, std::ostream& out) {
  for (std::size_t j = 0; j < ds.feature_dim; ++j) out << 'x' << j << ',';
  out << "t,a,y";
  if (ds.true_catea) out << ",catea";
  out << '\n';
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const Sample& s = ds.samples[i];
    for (double v : s.x) out << detail::format_g17(v) << ',';
    out << s.t << ',' << s.a << ',' << detail::format_g17(s.y);
    if (ds.true_catea) out << ',' << detail::format_g17((*ds.true_catea)[i]);
    out << '\n';
  }
}

inline void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  write_dataset_csv(ds, f);
}

inline Dataset read_dataset_csv(std::istream& in, NonAdherenceMode mode,
                                OutcomeKind outcome_kind) {
  Dataset ds;
  ds.mode = mode;
  ds.outcome_kind = outcome_kind;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty dataset CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
  }
  std::size_t d = 0;
  while (d < header.size() && header[d] == "x" + std::to_string(d)) ++d;
  bool has_catea = !header.empty() && header.back() == "catea";
  const std::size_t expected = d + 3 + (has_catea ? 1 : 0);
  if (header.size() != expected) throw DataError("malformed dataset CSV header");
  ds.feature_dim = d;
  if (has_catea) ds.true_catea.emplace();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    Sample s;
    s.x.reserve(d);
    std::vector<double> fields;
    fields.reserve(expected);
    while (std::getline(ss, tok, ',')) fields.push_back(std::stod(tok));
    if (fields.size() != expected) throw DataError("malformed dataset CSV row");
    s.x.assign(fields.begin(), fields.begin() + d);
    s.t = static_cast<int>(fields[d]);
    s.a = static_cast<int>(fields[d + 1]);
    s.y = fields[d + 2];
    if (has_catea) ds.true_catea->push_back(fields[d + 3]);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

inline Dataset read_dataset_csv(const std::string& path, NonAdherenceMode mode,
                                OutcomeKind outcome_kind) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open for reading: " + path);
  return read_dataset_csv(f, mode, outcome_kind);
}

}  // namespace catea
