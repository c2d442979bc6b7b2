#pragma once

// Command-line front end. `dispatch` is kept apart from main() so tests can
// drive it in-process.
//
// Exit codes: 0 success, 1 procedure failure (prints the error name),
// 2 parse or validation failure (one-line diagnostic).

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "scf/scf.hpp"

namespace scf::cli {

using io::json;

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// SCF_SEED, default 0.
inline std::uint64_t seed_from_env() {
  const char* raw = std::getenv("SCF_SEED");
  if (raw == nullptr || *raw == '\0') return 0;
  const std::string s(raw);
  std::uint64_t seed = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorKind::InvalidDocument, "SCF_SEED must be a non-negative integer");
  return seed;
}

/// Columns: t, re/im of each tracked eigenvalue, gap.
inline void write_scan_csv(const PathScanReport& scan, std::ostream& out) {
  const auto tracked = track_eigenvalues(scan.spectra);
  const std::size_t width = tracked.empty() ? 0 : tracked.front().size();
  out << "t";
  for (std::size_t k = 0; k < width; ++k) out << ",re" << k << ",im" << k;
  out << ",gap\n";
  for (std::size_t i = 0; i < scan.grid.size(); ++i) {
    out << format_double(scan.grid[i]);
    for (Complex z : tracked[i]) out << ',' << format_double(z.real()) << ',' << format_double(z.imag());
    out << ',' << format_double(scan.gaps[i]) << '\n';
  }
}

namespace detail {

struct Loaded {
  io::ChannelDocument doc;
  Superoperator map;
};

inline Loaded load(const std::string& path) {
  io::ChannelDocument doc = io::load_document(path);
  Superoperator map = io::to_superop(doc);
  return {std::move(doc), std::move(map)};
}

inline json spectrum_section(const Superoperator& s) { return io::to_json(analyze_spectrum(s.mat, 1e-7, 1e-8)); }

inline void emit_document(const io::ChannelDocument& doc, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << io::dump(io::to_json(doc));
  } else {
    io::store_document(doc, path);
  }
}

inline ChannelClass parse_class(const std::string& s) {
  if (s == "cptp") return ChannelClass::cptp;
  if (s == "unital") return ChannelClass::unital;
  if (s == "ptp") return ChannelClass::ptp;
  return ChannelClass::automatic;
}

}  // namespace detail

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inspect quantum channels and Lindbladians and regularize them to simple spectra", "scf"};
  app.require_subcommand(1);

  std::string inspect_file;
  auto* inspect = app.add_subcommand("inspect", "Spectrum, multiplicities and class certificates as JSON");
  inspect->add_option("FILE", inspect_file, "Channel document")->required();

  std::string construct_out;
  int psi_dim = 2;
  std::string example_name;
  double example_mu = 1.0;
  double remark_a = 0.0;
  double remark_b = 0.0;
  auto* construct = app.add_subcommand("construct", "Write a channel document for a built-in construction");
  construct->require_subcommand(1);
  construct->fallthrough();
  construct->add_option("--out", construct_out, "Output file (default: stdout)");
  auto* psi = construct->add_subcommand("psi", "Unital channel with n^2 distinct eigenvalues");
  psi->add_option("--dim", psi_dim, "System dimension")->required()->check(CLI::Range(1, 64));
  auto* example = construct->add_subcommand("example", "Named qubit example");
  example->add_option("--name", example_name)->required()->check(CLI::IsMember({"eq1", "reset", "phi-mu"}));
  example->add_option("--mu", example_mu, "Mixing weight for phi-mu");
  auto* remark = construct->add_subcommand("remark", "Two-parameter defective unital family");
  remark->add_option("--a", remark_a)->required();
  remark->add_option("--b", remark_b)->required();

  std::string reg_file;
  std::string reg_out;
  double reg_eps = 0.0;
  std::string reg_budget = "fro";
  std::string reg_class = "auto";
  auto* regularize = app.add_subcommand("regularize", "Convex-mixing regularization of a channel or generator");
  regularize->add_option("FILE", reg_file)->required();
  regularize->add_option("--eps", reg_eps)->required();
  regularize->add_option("--budget", reg_budget)->check(CLI::IsMember({"fro", "diamond"}));
  regularize->add_option("--class", reg_class)->check(CLI::IsMember({"auto", "cptp", "unital", "ptp"}));
  regularize->add_option("--out", reg_out, "Write the regularized document here");

  std::string mark_file;
  std::string mark_out;
  double mark_eps = 0.0;
  std::vector<std::string> mark_product;
  auto* markovian = app.add_subcommand("markovian", "Regularize e^L, or a product of exponentials");
  markovian->add_option("FILE", mark_file, "Generator document")->required();
  markovian->add_option("--eps", mark_eps)->required();
  markovian->add_option("--product", mark_product, "Further generator documents, in product order");
  markovian->add_option("--out", mark_out, "Write the regularized channel here");

  std::string scan_from;
  std::string scan_to;
  std::string scan_csv;
  int scan_grid = 1001;
  auto* scan = app.add_subcommand("scan", "Eigenvalue gaps along the straight path between two maps");
  scan->add_option("--from", scan_from)->required();
  scan->add_option("--to", scan_to)->required();
  scan->add_option("--grid", scan_grid)->check(CLI::Range(2, 1000000));
  scan->add_option("--csv", scan_csv, "Eigenvalue trajectory CSV");

  std::string verify_file;
  std::string verify_class;
  auto* verify = app.add_subcommand("verify", "Exit 0 iff the document certifies the class");
  verify->add_option("FILE", verify_file)->required();
  verify->add_option("--class", verify_class)->required()->check(CLI::IsMember({"cptp", "unital", "gksl"}));

  std::uint64_t seed = 0;
  std::vector<detail::Loaded> inputs;
  std::vector<std::string> input_names;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    seed = seed_from_env();
    std::vector<std::string> files;
    if (*inspect) files = {inspect_file};
    if (*regularize) files = {reg_file};
    if (*markovian) {
      files = {mark_file};
      files.insert(files.end(), mark_product.begin(), mark_product.end());
    }
    if (*scan) files = {scan_from, scan_to};
    if (*verify) files = {verify_file};
    for (const std::string& f : files) inputs.push_back(detail::load(f));
    input_names = files;
    if (*markovian)
      for (const auto& in : inputs)
        if (in.doc.kind != MapKind::generator)
          throw Error(ErrorKind::InvalidDocument, "markovian expects generator documents");
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  RegularizeOptions opt;
  opt.seed = seed;
  try {
    if (*inspect) {
      const auto& in = inputs.front();
      json report = {{"command", "inspect"}, {"inputs", input_names}, {"n", in.map.n}, {"kind", io::kind_name(in.doc.kind)}};
      report["spectrum"] = detail::spectrum_section(in.map);
      report["certificates"] = io::to_json(certify(in.map, in.doc.kind, seed));
      out << io::dump(report);
      return 0;
    }

    if (*construct) {
      io::ChannelDocument doc;
      if (*psi) {
        doc = io::make_document(build_psi(psi_dim).superop, MapKind::channel,
                                {{"construction", "psi"}, {"dim", std::to_string(psi_dim)}});
      } else if (*example) {
        double mu = example_name == "eq1" ? 1.0 : example_name == "reset" ? 0.0 : example_mu;
        build_phi_mu(mu);
        doc = io::make_document(phi_mu_ptm(mu), {{"construction", example_name}, {"mu", format_double(mu)}});
      } else {
        const Superoperator s = build_remark_family(remark_a, remark_b);
        doc = io::make_document(to_ptm(s), {{"construction", "remark"},
                                            {"a", format_double(remark_a)},
                                            {"b", format_double(remark_b)}});
      }
      detail::emit_document(doc, construct_out, out);
      return 0;
    }

    if (*regularize) {
      const auto& in = inputs.front();
      const BudgetNorm budget = reg_budget == "fro" ? BudgetNorm::fro : BudgetNorm::diamond_upper;
      const Regularized r = in.doc.kind == MapKind::channel
                                ? regularize_channel(in.map, reg_eps, budget, detail::parse_class(reg_class), opt)
                                : regularize_generator(in.map, reg_eps, budget, opt);
      json report = {{"command", "regularize"}, {"inputs", input_names}, {"n", in.map.n}, {"kind", io::kind_name(in.doc.kind)}};
      report["regularization"] = io::to_json(r.report);
      report["spectrum"] = detail::spectrum_section(r.output);
      report["certificates"] = io::to_json(r.report.output_cert);
      if (!reg_out.empty())
        io::store_document(io::make_document(r.output, in.doc.kind,
                                             {{"generated_by", "regularize"}, {"lambda", format_double(r.report.lambda)}}),
                           reg_out);
      out << io::dump(report);
      return 0;
    }

    if (*markovian) {
      std::vector<Superoperator> ls;
      for (const auto& in : inputs) ls.push_back(in.map);
      const MarkovianRegularized r =
          ls.size() == 1 ? regularize_markovian(ls.front(), mark_eps, opt) : regularize_markovian_product(ls, mark_eps, opt);
      json report = {{"command", "markovian"}, {"inputs", input_names}, {"n", r.channel.n}, {"kind", "channel"}};
      report["regularization"] = io::to_json(r.report);
      report["spectrum"] = detail::spectrum_section(r.channel);
      report["certificates"] = io::to_json(r.report.output_cert);
      if (!mark_out.empty())
        io::store_document(io::make_document(r.channel, MapKind::channel, {{"generated_by", "markovian"}}), mark_out);
      out << io::dump(report);
      return 0;
    }

    if (*scan) {
      const PathScanReport s = scan_path(inputs[0].map, inputs[1].map, scan_grid);
      if (!scan_csv.empty()) {
        std::ofstream csv(scan_csv, std::ios::binary);
        if (!csv) throw Error(ErrorKind::InvalidDocument, "cannot write '" + scan_csv + "'");
        write_scan_csv(s, csv);
      }
      json report = {{"command", "scan"}, {"inputs", input_names}, {"n", inputs[0].map.n}};
      report["scan"] = io::to_json(s);
      out << io::dump(report);
      return 0;
    }

    if (*verify) {
      const auto& in = inputs.front();
      const MapKind kind = verify_class == "gksl" ? MapKind::generator : MapKind::channel;
      const ClassCertificate c = certify(in.map, kind, seed);
      const bool passed = verify_class == "gksl" ? c.gksl : verify_class == "unital" ? (c.cptp() && c.unital) : c.cptp();
      json report = {{"command", "verify"}, {"inputs", input_names}, {"class", verify_class}, {"passed", passed}};
      report["certificates"] = io::to_json(c);
      out << io::dump(report);
      if (!passed) err << "error: certificates do not pass for class " << verify_class << "\n";
      return passed ? 0 : 1;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace scf::cli
