#include "cvdv/serialization.hpp"

#include <cstdio>
#include <ostream>
#include <string>

namespace cvdv {

namespace {

void put_layout(Json& j, const ModeLayout& layout) {
  j["mode_dims"] = layout.dims();
  j["mode_labels"] = layout.labels();
}

ModeLayout get_layout(const Json& j) {
  try {
    return ModeLayout(j.at("mode_dims").get<std::vector<int>>(),
                      j.at("mode_labels").get<std::vector<std::string>>());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed mode layout: ") + e.what());
  }
}

Json interleave(const Complex* data, Eigen::Index n) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    arr.push_back(data[i].real());
    arr.push_back(data[i].imag());
  }
  return arr;
}

std::vector<Complex> deinterleave(const Json& arr, std::size_t expected) {
  std::vector<double> flat;
  try {
    flat = arr.get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed complex array: ") + e.what());
  }
  if (flat.size() != 2 * expected) {
    throw ConfigError("complex array has " + std::to_string(flat.size()) + " numbers, expected " +
                      std::to_string(2 * expected));
  }
  std::vector<Complex> out(expected);
  for (std::size_t i = 0; i < expected; ++i) out[i] = {flat[2 * i], flat[2 * i + 1]};
  return out;
}

void expect_kind(const Json& j, const char* kind) {
  if (!j.is_object() || j.value("kind", "") != kind) {
    throw ConfigError(std::string("expected a JSON object of kind ") + kind);
  }
}

}  // namespace

Json to_json(const FockState& state) {
  Json j;
  j["kind"] = "fock_state";
  put_layout(j, state.layout());
  j["amplitudes"] = interleave(state.amplitudes().data(), state.amplitudes().size());
  return j;
}

Json to_json(const DensityOperator& rho) {
  Json j;
  j["kind"] = "density_operator";
  put_layout(j, rho.layout());
  const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = rho.matrix();
  j["matrix"] = interleave(rows.data(), rows.size());
  return j;
}

FockState fock_state_from_json(const Json& j) {
  expect_kind(j, "fock_state");
  ModeLayout layout = get_layout(j);
  const auto values = deinterleave(j.at("amplitudes"), layout.total_dim());
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return FockState(std::move(layout), std::move(v));
}

DensityOperator density_operator_from_json(const Json& j) {
  expect_kind(j, "density_operator");
  ModeLayout layout = get_layout(j);
  const std::size_t n = layout.total_dim();
  const auto values = deinterleave(j.at("matrix"), n * n);
  Matrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) m(r, c) = values[r * n + c];
  }
  return DensityOperator(std::move(layout), std::move(m));
}

Json tomography_report(const TomographyResult& result) {
  const Matrix& m = result.state.matrix();
  Json re = Json::array();
  Json im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array();
    Json ri = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  Json j;
  j["dim"] = m.rows();
  j["mode"] = result.state.layout().labels()[0];
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["log_likelihood"] = result.log_likelihood.empty() ? 0.0 : result.log_likelihood.back();
  j["dropped_records"] = result.dropped_records;
  j["warnings"] = result.warnings;
  return j;
}

void write_likelihood_trace_csv(std::ostream& out, std::span<const double> trace) {
  out << "#schema-version 1 likelihood-trace\n";
  out << "iteration,log_likelihood\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, trace[i]);
    out << buf;
  }
}

void write_wigner_csv(std::ostream& out, const WignerGrid& grid) {
  const auto& s = grid.spec;
  char buf[64];
  out << "#schema-version 1 wigner-grid\n";
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,", s.x_min, s.x_max, s.x_steps);
  out << buf;
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", s.p_min, s.p_max, s.p_steps);
  out << buf;
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", grid.values(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace cvdv
