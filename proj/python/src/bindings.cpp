// Python module `gcnfair._core`.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gcnfair/error.hpp"
#include "gcnfair/fairness.hpp"
#include "gcnfair/gcn.hpp"
#include "gcnfair/graph.hpp"
#include "gcnfair/metrics.hpp"
#include "gcnfair/pipeline.hpp"
#include "gcnfair/spectral.hpp"
#include "gcnfair/synth.hpp"
#include "gcnfair/theory.hpp"

namespace py = pybind11;
using namespace gcnfair;

namespace {

using PairList = std::vector<std::pair<NodeId, NodeId>>;

std::vector<NodePair> to_pairs(const PairList& in) {
  std::vector<NodePair> out;
  out.reserve(in.size());
  for (const auto& [u, v] : in) out.push_back({u, v});
  return out;
}

PairList from_pairs(const std::vector<NodePair>& in) {
  PairList out;
  out.reserve(in.size());
  for (const auto& e : in) out.emplace_back(e.u, e.v);
  return out;
}

py::dict metric_dict(const MetricValue& m) {
  py::dict d;
  d["name"] = m.name;
  d["value"] = m.value;
  d["n"] = m.n;
  d["flags"] = m.flags;
  return d;
}

py::dict mean_std_dict(const MeanStd& m) {
  py::dict d;
  d["mean"] = m.mean;
  d["std"] = m.std;
  return d;
}

py::dict assessment_dict(const FairnessAssessment& a) {
  py::list groups;
  for (const auto& g : a.groups) {
    py::dict row;
    row["group"] = g.group;
    row["delta"] = g.delta;
    row["delta_hat"] = g.delta_hat;
    row["disparity"] = g.disparity;
    row["skipped"] = g.skipped;
    groups.append(row);
  }
  py::dict d;
  d["mean_delta"] = a.mean_delta;
  d["mean_delta_hat"] = a.mean_delta_hat;
  d["counted_groups"] = a.counted_groups;
  d["groups"] = groups;
  return d;
}

FilterKind filter_arg(const std::string& s) { return parse_filter(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "GCN link prediction with within-group degree analysis and fairness regularization";

  static py::exception<Error> error_type(m, "GcnfairError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = to_string(e.code());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("n", &Dataset::n)
      .def_property_readonly("edges", [](const Dataset& d) { return from_pairs(d.edges); })
      .def_readonly("features", &Dataset::features)
      .def_readonly("s_labels", &Dataset::s_labels)
      .def_readonly("t_labels", &Dataset::t_labels)
      .def_readonly("self_loop_weight", &Dataset::self_loop_weight)
      .def_readonly("s_names", &Dataset::s_names)
      .def_readonly("t_names", &Dataset::t_names)
      .def("__repr__", [](const Dataset& d) {
        return "<Dataset n=" + std::to_string(d.n) + " edges=" + std::to_string(d.edges.size()) +
               " d=" + std::to_string(d.feature_dim()) + ">";
      });

  m.def(
      "make_dataset",
      [](std::size_t n, const PairList& edges, Eigen::MatrixXd features, std::vector<int> s_labels,
         std::optional<std::vector<int>> t_labels, double self_loop_weight) {
        return make_dataset(n, to_pairs(edges), std::move(features), std::move(s_labels), std::move(t_labels),
                            self_loop_weight);
      },
      py::arg("n"), py::arg("edges"), py::arg("features"), py::arg("s_labels"), py::arg("t_labels") = py::none(),
      py::arg("self_loop_weight") = 1.0);

  m.def(
      "load_dataset",
      [](const std::filesystem::path& edges, const std::filesystem::path& features,
         const std::filesystem::path& labels, double self_loop_weight, const std::string& normalization) {
        LoadOptions o;
        o.self_loop_weight = self_loop_weight;
        o.normalization = parse_feature_norm(normalization);
        return load_dataset(edges, features, labels, o);
      },
      py::arg("edges"), py::arg("features"), py::arg("labels"), py::arg("self_loop_weight") = 1.0,
      py::arg("normalization") = "none");

  m.def(
      "synth_generate",
      [](std::vector<std::size_t> group_sizes, double p_in, double p_out, double t1_fraction,
         double disparity_boost, std::size_t feature_dim, double feature_separation, double feature_noise,
         double self_loop_weight, std::uint64_t seed) {
        SynthConfig c;
        c.group_sizes = std::move(group_sizes);
        c.p_in = p_in;
        c.p_out = p_out;
        c.t1_fraction = t1_fraction;
        c.disparity_boost = disparity_boost;
        c.feature_dim = feature_dim;
        c.feature_separation = feature_separation;
        c.feature_noise = feature_noise;
        c.self_loop_weight = self_loop_weight;
        c.seed = seed;
        return synth_generate(c);
      },
      py::arg("group_sizes") = std::vector<std::size_t>{30, 30}, py::arg("p_in") = 0.3, py::arg("p_out") = 0.01,
      py::arg("t1_fraction") = 0.5, py::arg("disparity_boost") = 0.0, py::arg("feature_dim") = 16,
      py::arg("feature_separation") = 1.0, py::arg("feature_noise") = 1.0, py::arg("self_loop_weight") = 1.0,
      py::arg("seed") = 0);

  m.def(
      "within_group_degrees",
      [](const Dataset& d) {
        const auto v = within_group_structure(d);
        py::dict out;
        out["degrees"] = v.wg_degrees;
        out["group_of"] = v.group_of;
        out["volumes"] = v.volumes;
        out["source_label"] = v.source_label;
        return out;
      },
      py::arg("dataset"), "Within-group degrees D-hat and refined groups.");

  m.def(
      "normalized_adjacency",
      [](const Dataset& d, const std::string& filter, bool within_group) {
        const FilterKind k = filter_arg(filter);
        if (within_group) return normalized_matrix(d, within_group_structure(d), k).matrix.to_dense();
        return normalized_matrix(d, k).matrix.to_dense();
      },
      py::arg("dataset"), py::arg("filter") = "sym", py::arg("within_group") = false,
      "Dense P (or P-hat when within_group is set).");

  m.def(
      "propagation_bounds",
      [](const Dataset& d, const std::string& filter, int layers) {
        const FilterKind k = filter_arg(filter);
        const auto v = within_group_structure(d);
        const auto p = normalized_matrix(d, k);
        const auto phat = normalized_matrix(d, v, k);
        const auto spec = block_spectrum(phat, v);
        const auto b = residual_and_bounds(p, phat, spec, layers, v);
        std::vector<double> gaps;
        for (const auto& blk : spec.blocks) gaps.push_back(blk.gap);
        py::dict out;
        out["gap"] = gaps;
        out["xi_norm"] = b.xi_norm;
        out["phat_norm"] = b.phat_norm;
        out["residual_term"] = b.residual_term;
        out["degree_ratio"] = b.degree_ratio;
        out["zeta_s"] = b.zeta_s;
        out["zeta_r"] = b.zeta_r;
        return out;
      },
      py::arg("dataset"), py::arg("filter") = "sym", py::arg("layers") = 2);

  py::class_<Model>(m, "Model")
      .def_property_readonly("filter", [](const Model& md) { return std::string(short_name(md.filter)); })
      .def_readwrite("weights", &Model::weights)
      .def_readwrite("identity_activations", &Model::identity_activations)
      .def_readonly("seed", &Model::seed)
      .def_property_readonly("layers", &Model::layers);

  m.def(
      "init_model",
      [](std::size_t input_dim, std::vector<int> dims, const std::string& filter, std::uint64_t seed) {
        return init_model(input_dim, dims, filter_arg(filter), seed);
      },
      py::arg("input_dim"), py::arg("dims"), py::arg("filter") = "sym", py::arg("seed") = 0);

  m.def(
      "forward",
      [](const Model& md, const Dataset& d) { return forward(md, normalized_matrix(d, md.filter), d.features); },
      py::arg("model"), py::arg("dataset"), "Final-layer representations.");

  m.def(
      "score_pairs",
      [](const Eigen::MatrixXd& h, const PairList& pairs) { return score_pairs(h, to_pairs(pairs)); },
      py::arg("representations"), py::arg("pairs"));

  m.def("load_checkpoint", [](const std::filesystem::path& p) { return load_checkpoint(p); }, py::arg("path"));

  m.def(
      "theory_report",
      [](const Model& md, const Dataset& message_graph, const PairList& pos, const PairList& neg) {
        const auto r = build_theory_report(md, message_graph, to_pairs(pos), to_pairs(neg));
        py::dict out;
        out["rho2"] = r.rho2;
        out["c1"] = r.c1;
        out["c2"] = r.c2;
        out["nrmse"] = metric_dict(r.nrmse);
        out["pcc"] = metric_dict(r.pcc);
        out["auc"] = metric_dict(r.auc);
        py::list pairs;
        for (const auto& tp : r.pairs) {
          pairs.append(py::make_tuple(tp.pair.u, tp.pair.v, tp.group, tp.label, tp.tau_raw, tp.tau_fitted,
                                      tp.gcn_score));
        }
        out["pairs"] = pairs;
        return out;
      },
      py::arg("model"), py::arg("message_graph"), py::arg("pos"), py::arg("neg"));

  m.def(
      "delta",
      [](const Dataset& d, const PairList& pairs, const std::vector<double>& scores, bool post_sigmoid) {
        const SubgroupView sv = subgroup_view(within_group_structure(d), d);
        return assessment_dict(delta(to_pairs(pairs), scores, sv,
                                     post_sigmoid ? ScoreMode::post_sigmoid : ScoreMode::pre_activation));
      },
      py::arg("dataset"), py::arg("pairs"), py::arg("scores"), py::arg("post_sigmoid") = true,
      "Per-group score gap between the two subgroups over the given pairs.");

  m.def(
      "delta_hat",
      [](const Dataset& d, const std::vector<double>& rho2, const std::vector<double>& c1,
         const std::string& filter) {
        if (!d.t_labels) throw Error(ErrorCode::missing_labels, "dataset has no subgroup labels");
        return assessment_dict(delta_hat(within_group_structure(d), rho2, c1, *d.t_labels, filter_arg(filter)));
      },
      py::arg("dataset"), py::arg("rho2"), py::arg("c1"), py::arg("filter") = "sym");

  m.def(
      "roc_auc",
      [](const std::vector<double>& pos, const std::vector<double>& neg) { return roc_auc(pos, neg).value; },
      py::arg("positive"), py::arg("negative"));
  m.def(
      "nrmse", [](const std::vector<double>& p, const std::vector<double>& t) { return nrmse(p, t).value; },
      py::arg("predictions"), py::arg("targets"));
  m.def(
      "pcc", [](const std::vector<double>& x, const std::vector<double>& y) { return pcc(x, y).value; },
      py::arg("x"), py::arg("y"));

  // Pipelines take a JSON config string; relative paths resolve against base_dir.
  m.def(
      "run_train",
      [](const std::string& config, const std::filesystem::path& out_dir, const std::filesystem::path& base_dir) {
        const auto r = run_train(parse_run_config(config, base_dir), out_dir);
        py::dict out;
        out["test_auc"] = mean_std_dict(r.test_auc);
        std::vector<double> per_seed;
        for (const auto& run : r.runs) per_seed.push_back(run.test_auc);
        out["seed_test_auc"] = per_seed;
        return out;
      },
      py::arg("config"), py::arg("out_dir") = std::filesystem::path{}, py::arg("base_dir") = std::filesystem::path{});

  m.def(
      "run_validate_theory",
      [](const std::string& config, const std::filesystem::path& out_dir, const std::filesystem::path& base_dir) {
        const auto r = run_validate_theory(parse_run_config(config, base_dir), out_dir);
        py::dict out;
        out["nrmse"] = mean_std_dict(r.nrmse);
        out["pcc"] = mean_std_dict(r.pcc);
        out["auc"] = mean_std_dict(r.auc);
        out["seeds"] = r.seeds;
        return out;
      },
      py::arg("config"), py::arg("out_dir") = std::filesystem::path{}, py::arg("base_dir") = std::filesystem::path{});

  m.def(
      "run_fairness_sweep",
      [](const std::string& config, const std::filesystem::path& out_dir, const std::filesystem::path& base_dir) {
        const auto t = run_fairness_sweep(parse_run_config(config, base_dir), out_dir);
        py::list rows;
        for (const auto& r : t.rows) {
          py::dict row;
          row["lambda_fair"] = r.lambda_fair;
          row["mean_delta"] = mean_std_dict(r.mean_delta);
          row["test_auc"] = mean_std_dict(r.test_auc);
          row["seed_delta"] = r.seed_delta;
          row["seed_auc"] = r.seed_auc;
          rows.append(row);
        }
        return rows;
      },
      py::arg("config"), py::arg("out_dir") = std::filesystem::path{}, py::arg("base_dir") = std::filesystem::path{});

  m.def(
      "run_delta_comparison",
      [](const std::string& config, const std::filesystem::path& out_dir, const std::filesystem::path& base_dir) {
        const auto c = run_delta_comparison(parse_run_config(config, base_dir), out_dir);
        py::list rows;
        for (const auto& r : c.rows) rows.append(py::make_tuple(r.seed, r.group, r.delta, r.delta_hat, r.delta_hat_closed));
        py::dict out;
        out["rows"] = rows;
        out["pcc"] = metric_dict(c.pcc);
        out["nrmse"] = metric_dict(c.nrmse);
        return out;
      },
      py::arg("config"), py::arg("out_dir") = std::filesystem::path{}, py::arg("base_dir") = std::filesystem::path{});
}
