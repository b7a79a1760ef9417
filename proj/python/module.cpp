#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "vicorpus/analysis.hpp"
#include "vicorpus/dataset.hpp"
#include "vicorpus/error.hpp"
#include "vicorpus/font_catalog.hpp"
#include "vicorpus/hash.hpp"
#include "vicorpus/pipeline.hpp"
#include "vicorpus/report.hpp"
#include "vicorpus/seed.hpp"

namespace py = pybind11;
using namespace vicorpus;
using nlohmann::json;

namespace {

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw py::value_error("not valid JSON");
  return j;
}

std::string annotate_report(const std::string& report_json, const std::string& doc_id, std::uint64_t seed,
                            const std::string& fonts_dir, double gap_factor, double line_overlap, double latex_overlap) {
  std::optional<fonts::FontCatalog> catalog;
  if (!fonts_dir.empty()) catalog = fonts::FontCatalog::index(fonts_dir);
  annotate::BuildOptions o;
  o.gap_factor = gap_factor;
  o.line_overlap = line_overlap;
  o.latex_overlap = latex_overlap;
  const ingest::SourceDocument doc{doc_id, "", "en", "", "", 0};
  const auto record = pipeline::make_record(doc, seed, report::parse_report(parse(report_json)),
                                            catalog ? &*catalog : nullptr, o);
  return dataset::serialize(record);
}

py::dict pca(const Eigen::MatrixXd& x, std::size_t k, bool allow_rank_deficient) {
  std::vector<analysis::BowVector> rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    analysis::BowVector v;
    v.doc_id = std::to_string(i);
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (x(i, j) != 0) v.entries.emplace_back(static_cast<int>(j), x(i, j));
    rows.push_back(std::move(v));
  }
  analysis::PcaOptions o;
  o.allow_rank_deficient = allow_rank_deficient;
  const auto m = analysis::fit_pca(rows, static_cast<std::size_t>(x.cols()), k, o);
  py::dict out;
  out["mean"] = m.mean;
  out["components"] = m.components;
  out["explained_variance"] = m.explained_variance;
  out["rank"] = m.rank;
  return out;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli::run(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_vicorpus, m) {
  m.doc() = "Native core of vicorpus";
  m.attr("__version__") = VICORPUS_VERSION;

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_OSError);

  m.def("report_schema_violations", [](const std::string& text) { return report::schema_violations(parse(text)); },
        py::arg("report_json"));
  m.def("record_schema_violations", [](const std::string& text) { return dataset::record_schema_violations(parse(text)); },
        py::arg("record_json"));
  m.def("annotate_report", &annotate_report, py::arg("report_json"), py::arg("doc_id") = "doc", py::arg("seed") = 0,
        py::arg("fonts_dir") = "", py::arg("gap_factor") = 1.0, py::arg("line_overlap") = 0.5,
        py::arg("latex_overlap") = 0.8, "Annotation record (JSON text) for one instrumentation report.");
  m.def(
      "validate_corpus",
      [](const std::string& root, bool verify_hashes) {
        dataset::ValidationOptions o;
        o.verify_hashes = verify_hashes;
        py::gil_scoped_release release;
        const auto rep = dataset::validate_corpus(root, o);
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& v : rep.violations) out.emplace_back(v.where, v.what);
        return std::make_pair(rep.records_checked, out);
      },
      py::arg("root"), py::arg("verify_hashes") = false, "(records checked, [(where, what)])");
  m.def("fit_pca", &pca, py::arg("x"), py::arg("k"), py::arg("allow_rank_deficient") = false);
  m.def("derive_seed", [](std::uint64_t run_seed, const std::string& key) { return derive_seed(run_seed, key); });
  m.def("sha256_hex", [](py::bytes data) { return sha256_hex(std::string_view(data)); });
  m.def("run_cli", &run_cli, py::arg("args"), "Runs the command line; returns (exit code, stdout, stderr).");
}
