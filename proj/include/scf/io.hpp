#pragma once

// JSON channel documents and report payloads.
//
// Document schema: {"n": int, "rep": "superop"|"choi"|"kraus"|"ptm",
// "kind": "channel"|"generator", "data": ..., "meta": {string: string}}.
// Matrices are row-major nested arrays of [re, im] pairs; "kraus" data is an
// array of such matrices. PTM entries may also be plain numbers. Keys are
// sorted and doubles are printed in shortest round-trip form.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>

#include "scf/regularize.hpp"

namespace scf::io {

using json = nlohmann::json;

enum class Rep { superop, choi, kraus, ptm };

inline std::string_view rep_name(Rep r) {
  switch (r) {
    case Rep::superop: return "superop";
    case Rep::choi: return "choi";
    case Rep::kraus: return "kraus";
    case Rep::ptm: return "ptm";
  }
  return "superop";
}

inline std::string_view kind_name(MapKind k) { return k == MapKind::channel ? "channel" : "generator"; }

struct ChannelDocument {
  int n = 1;
  Rep rep = Rep::superop;
  MapKind kind = MapKind::channel;
  std::variant<CMatrix, std::vector<CMatrix>> data = CMatrix::Identity(1, 1);
  std::map<std::string, std::string> meta;

  friend bool operator==(const ChannelDocument& a, const ChannelDocument& b) {
    if (a.n != b.n || a.rep != b.rep || a.kind != b.kind || a.meta != b.meta) return false;
    if (a.data.index() != b.data.index()) return false;
    auto same = [](const CMatrix& x, const CMatrix& y) {
      if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
      for (Index i = 0; i < x.size(); ++i) {
        const Complex p = x.data()[i];
        const Complex q = y.data()[i];
        if (std::memcmp(&p, &q, sizeof(Complex)) != 0) return false;
      }
      return true;
    };
    if (a.data.index() == 0) return same(std::get<0>(a.data), std::get<0>(b.data));
    const auto& ka = std::get<1>(a.data);
    const auto& kb = std::get<1>(b.data);
    if (ka.size() != kb.size()) return false;
    for (std::size_t i = 0; i < ka.size(); ++i)
      if (!same(ka[i], kb[i])) return false;
    return true;
  }
};

inline json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

[[noreturn]] inline void invalid(const std::string& what) { throw Error(ErrorKind::InvalidDocument, what); }

inline double real_json(const json& v) {
  if (!v.is_number()) invalid("expected a number");
  return v.get<double>();
}

inline Complex complex_from_json(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2) invalid("expected a [re, im] pair");
  return {real_json(v[0]), real_json(v[1])};
}

inline CMatrix matrix_from_json(const json& v, Index dim) {
  if (!v.is_array() || static_cast<Index>(v.size()) != dim) invalid("matrix must have " + std::to_string(dim) + " rows");
  CMatrix m(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != dim)
      invalid("matrix row must have " + std::to_string(dim) + " entries");
    for (Index j = 0; j < dim; ++j) m(i, j) = complex_from_json(row[static_cast<std::size_t>(j)]);
  }
  if (!m.allFinite()) invalid("matrix has non-finite entries");
  return m;
}

}  // namespace detail

inline json to_json(const ChannelDocument& doc) {
  json j;
  j["n"] = doc.n;
  j["rep"] = rep_name(doc.rep);
  j["kind"] = kind_name(doc.kind);
  if (doc.data.index() == 0) {
    j["data"] = matrix_json(std::get<0>(doc.data));
  } else {
    json list = json::array();
    for (const CMatrix& k : std::get<1>(doc.data)) list.push_back(matrix_json(k));
    j["data"] = std::move(list);
  }
  if (!doc.meta.empty()) j["meta"] = doc.meta;
  return j;
}

inline ChannelDocument from_json(const json& j) {
  using detail::invalid;
  if (!j.is_object()) invalid("document must be a JSON object");
  for (const char* key : {"n", "rep", "kind", "data"})
    if (!j.contains(key)) invalid(std::string("missing field '") + key + "'");
  ChannelDocument doc;
  if (!j["n"].is_number_integer() || j["n"].get<int>() < 1) invalid("'n' must be a positive integer");
  doc.n = j["n"].get<int>();
  const std::string rep = j["rep"].is_string() ? j["rep"].get<std::string>() : "";
  if (rep == "superop") doc.rep = Rep::superop;
  else if (rep == "choi") doc.rep = Rep::choi;
  else if (rep == "kraus") doc.rep = Rep::kraus;
  else if (rep == "ptm") doc.rep = Rep::ptm;
  else invalid("'rep' must be one of superop, choi, kraus, ptm");
  const std::string kind = j["kind"].is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "channel") doc.kind = MapKind::channel;
  else if (kind == "generator") doc.kind = MapKind::generator;
  else invalid("'kind' must be channel or generator");

  const Index n = doc.n;
  switch (doc.rep) {
    case Rep::superop:
    case Rep::choi: doc.data = detail::matrix_from_json(j["data"], n * n); break;
    case Rep::ptm: {
      if (doc.n != 2) invalid("ptm documents need n == 2");
      CMatrix p = detail::matrix_from_json(j["data"], 4);
      if (p.imag().cwiseAbs().maxCoeff() != 0.0) invalid("ptm entries must be real");
      doc.data = std::move(p);
      break;
    }
    case Rep::kraus: {
      const json& list = j["data"];
      if (!list.is_array() || list.empty()) invalid("kraus data must be a non-empty array of matrices");
      std::vector<CMatrix> ops;
      for (const json& k : list) ops.push_back(detail::matrix_from_json(k, n));
      doc.data = std::move(ops);
      break;
    }
  }
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) invalid("'meta' must be an object of strings");
    for (const auto& [key, value] : j["meta"].items()) {
      if (!value.is_string()) invalid("'meta' values must be strings");
      doc.meta[key] = value.get<std::string>();
    }
  }
  return doc;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline ChannelDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidDocument, "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidDocument, "'" + path + "': " + e.what());
  }
  return from_json(j);
}

inline void store_document(const ChannelDocument& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidDocument, "cannot write '" + path + "'");
  out << dump(to_json(doc));
}

inline Superoperator to_superop(const ChannelDocument& doc) {
  switch (doc.rep) {
    case Rep::superop: return {doc.n, std::get<0>(doc.data)};
    case Rep::choi: return scf::to_superop(ChoiMatrix{doc.n, std::get<0>(doc.data)});
    case Rep::kraus: return scf::to_superop(KrausSet{doc.n, std::get<1>(doc.data)});
    case Rep::ptm: {
      PauliTransferMatrix p;
      p.mat = std::get<0>(doc.data).real();
      return scf::to_superop(p);
    }
  }
  return {doc.n, std::get<0>(doc.data)};
}

inline ChannelDocument make_document(const Superoperator& s, MapKind kind,
                                     std::map<std::string, std::string> meta = {}) {
  return {s.n, Rep::superop, kind, s.mat, std::move(meta)};
}

inline ChannelDocument make_document(const PauliTransferMatrix& p, std::map<std::string, std::string> meta = {}) {
  return {2, Rep::ptm, MapKind::channel, CMatrix(p.mat.cast<Complex>()), std::move(meta)};
}

// ---- report payloads ----

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::vector<Complex> sorted_spectrum(std::vector<Complex> values) {
  std::sort(values.begin(), values.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return values;
}

inline json spectrum_json(const std::vector<Complex>& values) {
  json out = json::array();
  for (Complex z : sorted_spectrum(values)) out.push_back(complex_json(z));
  return out;
}

inline json to_json(const SpectrumReport& r) {
  json j;
  j["eigenvalues"] = spectrum_json(r.spectrum.eigenvalues);
  j["max_residual"] = r.spectrum.residuals.empty()
                          ? 0.0
                          : *std::max_element(r.spectrum.residuals.begin(), r.spectrum.residuals.end());
  j["cluster_tolerance"] = r.spectrum.cluster_tolerance;
  j["rank_tolerance"] = r.rank_tolerance;
  j["min_gap"] = finite_or_null(r.min_gap);
  j["simple"] = r.simple;
  j["defective"] = r.defective;
  json clusters = json::array();
  for (const EigenCluster& c : r.clusters) {
    clusters.push_back({{"center", complex_json(c.center)},
                        {"algebraic_multiplicity", c.algebraic},
                        {"geometric_multiplicity", c.geometric},
                        {"defective", c.defective()}});
  }
  j["clusters"] = std::move(clusters);
  return j;
}

inline json to_json(const ClassCertificate& c) {
  return {{"kind", kind_name(c.kind)},
          {"tp_residual", c.tp_residual},
          {"unital_residual", c.unital_residual},
          {"cp_min_eig", c.cp_min_eig},
          {"hermiticity_residual", c.hermiticity_residual},
          {"gksl_trace_residual", c.gksl_trace_residual},
          {"gksl_ccp_min_eig", c.gksl_ccp_min_eig},
          {"positivity_min_sample", c.positivity_min_sample},
          {"flags",
           {{"tp", c.tp},
            {"unital", c.unital},
            {"cp", c.cp},
            {"cptp", c.cptp()},
            {"positive_heuristic", c.positive_heuristic},
            {"ptp_heuristic", c.ptp()},
            {"gksl", c.gksl}}}};
}

inline json to_json(const RegularizationReport& r) {
  json j;
  j["budget"] = r.budget == BudgetNorm::fro ? "fro" : "diamond";
  j["lambda"] = r.lambda;
  j["time_factors"] = r.time_factors;
  j["budget_distance"] = r.budget_distance;
  j["achieved_gap"] = finite_or_null(r.achieved_gap);
  j["fro_distance"] = r.fro_distance;
  j["diamond_upper"] = r.diamond_upper;
  if (r.telescoped_upper) j["telescoped_upper"] = *r.telescoped_upper;
  if (r.strip_condition) j["strip_condition"] = *r.strip_condition;
  j["attempts"] = r.attempts;
  j["input_certificate"] = to_json(r.input_cert);
  j["output_certificate"] = to_json(r.output_cert);
  j["output_spectrum"] = spectrum_json(r.output_spectrum);
  return j;
}

inline json to_json(const PathScanReport& r) {
  json intervals = json::array();
  for (const auto& [lo, hi] : r.exceptional_intervals) intervals.push_back(json::array({lo, hi}));
  json gaps = json::array();
  for (double g : r.gaps) gaps.push_back(finite_or_null(g));
  return {{"grid_size", r.grid.size()},
          {"tau_gap", r.tau_gap},
          {"gaps", std::move(gaps)},
          {"exceptional_intervals", std::move(intervals)}};
}

}  // namespace scf::io
