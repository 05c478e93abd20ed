#pragma once

// JSON encodings. A complex matrix is
//   {"rows": n, "cols": m, "re_im": [[re, im], ...]}   (row-major)
// and a bipartite pure state is its d_A x d_B amplitude matrix psi(a, b) in
// the same encoding.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "entrate/ancilla.hpp"
#include "entrate/optimum.hpp"
#include "entrate/rate.hpp"

namespace entrate::io {

using json = nlohmann::ordered_json;

inline json matrix_to_json(const ComplexMatrix& m) {
  json entries = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) entries.push_back({m(r, c).real(), m(r, c).imag()});
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re_im", std::move(entries)}};
}

inline json matrix_to_json(const RealMatrix& m) { return matrix_to_json(ComplexMatrix(m.cast<Complex>())); }

inline ComplexMatrix matrix_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ParseError("matrix JSON must be an object");
    const auto rows = j.at("rows").get<long long>();
    const auto cols = j.at("cols").get<long long>();
    if (rows < 1 || cols < 1) throw ParseError("matrix JSON: rows and cols must be >= 1");
    const json& entries = j.at("re_im");
    if (!entries.is_array() || static_cast<long long>(entries.size()) != rows * cols) {
      throw ParseError("matrix JSON: re_im must hold rows * cols entries");
    }
    ComplexMatrix m(rows, cols);
    for (long long r = 0; r < rows; ++r)
      for (long long c = 0; c < cols; ++c) {
        const json& e = entries[static_cast<std::size_t>(r * cols + c)];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
          throw ParseError("matrix JSON: each entry must be [re, im]");
        }
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("matrix JSON: ") + e.what());
  }
}

inline json state_to_json(const qcore::PureState& psi) { return matrix_to_json(psi.as_matrix()); }

inline qcore::PureState state_from_json(const json& j) {
  try {
    return qcore::PureState::from_matrix(matrix_from_json(j));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("state JSON: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("write failed for " + path);
}

inline ComplexMatrix read_matrix_file(const std::string& path) { return matrix_from_json(read_json_file(path)); }
inline qcore::PureState read_state_file(const std::string& path) { return state_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Reports.

inline json rate_pair(double nats) {
  return json{{"nat", nats}, {"bits", to_base(nats, LogBase::bits)}};
}

inline json to_json(const rate::EnergyStats& s) {
  return json{{"mean", s.mean},
              {"variance", s.variance},
              {"variance_real_part", s.variance_real_part},
              {"variance_imag_part", s.variance_imag_part}};
}

inline json vector_to_json(const RealVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json to_json(const optimum::LagrangeSolution& s) {
  return json{{"k", vector_to_json(s.k)},
              {"lambda1", s.lambda1},
              {"lambda2", s.lambda2},
              {"max_rate", rate_pair(s.max_rate)},
              {"degenerate", s.degenerate}};
}

inline json to_json(const optimum::OptimalDesign& d) {
  return json{{"gamma", d.gamma},
              {"d", d.d},
              {"coefficients", vector_to_json(d.state.coefficients())},
              {"rate", rate_pair(d.rate)},
              {"variance_scale", d.variance_scale}};
}

inline json to_json(const ancilla::AncillaOptimum& o) {
  json starts = json::array();
  for (const auto& s : o.start_records) {
    starts.push_back({{"value", s.value}, {"iterations", s.iterations}, {"converged", s.converged}});
  }
  json schedule = json::array();
  for (const auto& st : o.schedule) {
    schedule.push_back({{"regularization", st.regularization}, {"floor", st.floor}});
  }
  json out{{"d_A", o.c_star.d_a()},
           {"d_A'", o.c_star.d_ancilla()},
           {"value", rate_pair(o.value)},
           {"lambda1", o.lambda1},
           {"C_star", matrix_to_json(o.c_star.c())},
           {"G_star", matrix_to_json(o.g_star.matrix())},
           {"starts", o.starts},
           {"converged_fraction", o.converged_fraction},
           {"regularization", o.regularization},
           {"floor", o.floor},
           {"unconstrained_bound", o.unconstrained_bound},
           {"start_diagnostics", std::move(starts)},
           {"schedule", std::move(schedule)}};
  if (std::isfinite(o.arbitrated_rate)) {
    out["arbitrated_rate"] = rate_pair(o.arbitrated_rate);
    out["arbitration_difference"] = o.arbitrated_rate - o.value;
  } else {
    out["arbitrated_rate"] = nullptr;
  }
  return out;
}

}  // namespace entrate::io
