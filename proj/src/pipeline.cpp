#include "gcnfair/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "gcnfair/error.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace gcnfair {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

SynthConfig parse_synth(const json& j) {
  SynthConfig c;
  read_if(j, "group_sizes", c.group_sizes);
  read_if(j, "p_in", c.p_in);
  read_if(j, "p_out", c.p_out);
  read_if(j, "t1_fraction", c.t1_fraction);
  read_if(j, "disparity_boost", c.disparity_boost);
  read_if(j, "feature_dim", c.feature_dim);
  read_if(j, "feature_separation", c.feature_separation);
  read_if(j, "feature_noise", c.feature_noise);
  read_if(j, "self_loop_weight", c.self_loop_weight);
  read_if(j, "seed", c.seed);
  validate(c);
  return c;
}

json synth_json(const SynthConfig& c) {
  return {{"group_sizes", c.group_sizes},
          {"p_in", c.p_in},
          {"p_out", c.p_out},
          {"t1_fraction", c.t1_fraction},
          {"disparity_boost", c.disparity_boost},
          {"feature_dim", c.feature_dim},
          {"feature_separation", c.feature_separation},
          {"feature_noise", c.feature_noise},
          {"self_loop_weight", c.self_loop_weight},
          {"seed", c.seed}};
}

json config_json(const RunConfig& c) {
  json j;
  j["dataset_name"] = c.dataset_name;
  if (c.synth) {
    j["synth"] = synth_json(*c.synth);
  } else {
    j["edges"] = c.edges.string();
    j["features"] = c.features.string();
    j["labels"] = c.labels.string();
  }
  j["normalization"] = to_string(c.normalization);
  j["self_loop_weight"] = c.self_loop_weight;
  j["filter"] = short_name(c.filter);
  j["layers"] = c.layers;
  j["dims"] = c.layer_dims();
  j["epochs"] = c.train.epochs;
  j["lr"] = c.train.learning_rate;
  j["beta1"] = c.train.beta1;
  j["beta2"] = c.train.beta2;
  j["adam_epsilon"] = c.train.epsilon;
  j["negative_ratio"] = c.train.negative_ratio;
  j["ratios"] = c.ratios;
  j["seeds"] = c.seeds;
  j["lambda_fair"] = c.lambda_fair;
  j["spectral_diagnostics"] = c.spectral_diagnostics;
  return j;
}

json metric_json(const MetricValue& m) {
  json j{{"name", m.name}, {"n", m.n}, {"flags", m.flags}};
  j["value"] = m.defined() ? json(m.value) : json(nullptr);
  return j;
}

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json assessment_json(const FairnessAssessment& a) {
  json groups = json::array();
  for (const auto& g : a.groups) {
    groups.push_back({{"group", g.group},
                      {"delta", g.delta},
                      {"delta_hat", g.delta_hat},
                      {"disparity", g.disparity},
                      {"n_t1", g.n_t1},
                      {"n_t2", g.n_t2},
                      {"skipped", g.skipped}});
  }
  return {{"mode", to_string(a.mode)},
          {"scope", to_string(a.scope)},
          {"mean_delta", a.mean_delta},
          {"mean_delta_hat", a.mean_delta_hat},
          {"counted_groups", a.counted_groups},
          {"groups", groups}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = detail::open_output(path);
  out << j.dump(2) << '\n';
}

void prepare_dir(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir.string() + ": " + ec.message());
}

void require_subgroups(const Dataset& data) {
  if (!data.has_subgroups()) {
    throw Error(ErrorCode::missing_labels, "this command needs subgroup (T) labels");
  }
}

}  // namespace

std::vector<int> RunConfig::layer_dims() const {
  if (!dims.empty()) return dims;
  return default_layer_dims(layers);
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::parse_error, "config: expected a JSON object");
  RunConfig c;
  try {
    read_if(j, "dataset_name", c.dataset_name);
    if (j.contains("synth")) c.synth = parse_synth(j.at("synth"));
    if (j.contains("edges")) c.edges = resolve(base_dir, j.at("edges").get<std::string>());
    if (j.contains("features")) c.features = resolve(base_dir, j.at("features").get<std::string>());
    if (j.contains("labels")) c.labels = resolve(base_dir, j.at("labels").get<std::string>());
    if (j.contains("normalization")) {
      c.normalization = parse_feature_norm(j.at("normalization").get<std::string>());
    }
    read_if(j, "self_loop_weight", c.self_loop_weight);
    if (j.contains("filter")) c.filter = parse_filter(j.at("filter").get<std::string>());
    read_if(j, "layers", c.layers);
    read_if(j, "dims", c.dims);
    read_if(j, "epochs", c.train.epochs);
    read_if(j, "lr", c.train.learning_rate);
    read_if(j, "beta1", c.train.beta1);
    read_if(j, "beta2", c.train.beta2);
    read_if(j, "adam_epsilon", c.train.epsilon);
    read_if(j, "negative_ratio", c.train.negative_ratio);
    read_if(j, "ratios", c.ratios);
    if (j.contains("seeds")) {
      if (j.at("seeds").is_number_integer()) {
        const auto count = j.at("seeds").get<std::uint64_t>();
        c.seeds.clear();
        for (std::uint64_t s = 0; s < count; ++s) c.seeds.push_back(s);
      } else {
        c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
      }
    }
    if (j.contains("lambda_fair")) {
      if (j.at("lambda_fair").is_number()) {
        c.lambda_fair = {j.at("lambda_fair").get<double>()};
      } else {
        c.lambda_fair = j.at("lambda_fair").get<std::vector<double>>();
      }
    }
    read_if(j, "spectral_diagnostics", c.spectral_diagnostics);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
  if (!c.dims.empty() && j.contains("layers") && static_cast<int>(c.dims.size()) != c.layers) {
    throw Error(ErrorCode::invalid_argument, "config: dims length does not match layers");
  }
  if (!c.dims.empty()) c.layers = static_cast<int>(c.dims.size());
  if (c.layers < 1) throw Error(ErrorCode::invalid_argument, "config: layers must be >= 1");
  if (c.seeds.empty()) throw Error(ErrorCode::invalid_argument, "config: no seeds");
  if (c.lambda_fair.empty()) throw Error(ErrorCode::invalid_argument, "config: no lambda_fair");
  for (double l : c.lambda_fair) {
    if (!(l >= 0.0)) throw Error(ErrorCode::invalid_argument, "config: lambda_fair must be >= 0");
  }
  if (!c.synth && (c.edges.empty() || c.features.empty() || c.labels.empty())) {
    throw Error(ErrorCode::invalid_argument,
                "config: give either synth settings or edges, features and labels paths");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string to_json_text(const RunConfig& config) { return config_json(config).dump(); }

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);
}

std::filesystem::path run_directory(const std::filesystem::path& out, const std::string& command,
                                    const RunConfig& config) {
  return out / (command + "-" + config.dataset_name + "-" + short_name(config.filter) + "-" +
                config_hash(config));
}

Dataset load_run_dataset(const RunConfig& config) {
  if (config.synth) {
    SynthConfig sc = *config.synth;
    sc.self_loop_weight = config.self_loop_weight;
    Dataset data = synth_generate(sc);
    if (config.normalization != FeatureNorm::none) {
      auto nf = normalize_features(data.features, config.normalization);
      data.features = std::move(nf.values);
      data.degenerate_feature_rows = std::move(nf.degenerate);
    }
    return data;
  }
  return load_dataset(config.edges, config.features, config.labels,
                      {config.self_loop_weight, config.normalization});
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

SeedRun train_seed(const Dataset& data, const RunConfig& config, std::uint64_t seed,
                   double lambda_fair) {
  SeedRun run;
  run.seed = seed;
  run.split = split_links(data.n, data.edges, config.ratios, seed);
  const auto dims = config.layer_dims();
  Model model = init_model(data.feature_dim(), dims, config.filter, seed);
  TrainConfig tc = config.train;
  tc.seed = seed;
  tc.lambda_fair = lambda_fair;
  run.result = train(std::move(model), data, run.split, tc);
  const Dataset message_graph = with_edges(data, run.split.train_pos);
  const NormalizedMatrix p = normalized_matrix(message_graph, config.filter);
  run.test_auc = link_auc(run.result.best, p, message_graph.features, run.split.test_pos,
                          run.split.test_neg);
  return run;
}

TrainRunResult run_train(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Dataset data = load_run_dataset(config);
  prepare_dir(out_dir);
  const double lambda = config.lambda_fair.front();
  TrainRunResult out;
  std::vector<double> aucs;
  for (auto seed : config.seeds) {
    out.runs.push_back(train_seed(data, config, seed, lambda));
    aucs.push_back(out.runs.back().test_auc);
  }
  out.test_auc = mean_std(aucs);
  if (out_dir.empty()) return out;

  auto hist = detail::open_output(out_dir / "history.csv");
  hist << "seed,epoch,train_loss,reg_term,val_auc\n";
  json runs = json::array();
  for (const auto& r : out.runs) {
    for (const auto& e : r.result.history) {
      hist << r.seed << ',' << e.epoch << ',' << detail::fmt(e.train_loss) << ','
           << detail::fmt(e.reg_term) << ',' << detail::fmt(e.val_auc) << '\n';
    }
    TrainConfig tc = config.train;
    tc.seed = r.seed;
    tc.lambda_fair = lambda;
    save_checkpoint(out_dir / ("model_seed" + std::to_string(r.seed) + ".json"), r.result.best, tc);
    runs.push_back({{"seed", r.seed},
                    {"best_epoch", r.result.best_epoch},
                    {"best_val_auc", r.result.best_val_auc},
                    {"test_auc", r.test_auc}});
  }
  write_json(out_dir / "report.json", {{"command", "train"},
                                       {"config", config_json(config)},
                                       {"lambda_fair", lambda},
                                       {"runs", runs},
                                       {"test_auc", mean_std_json(out.test_auc)}});
  return out;
}

TheoryRunResult run_validate_theory(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Dataset data = load_run_dataset(config);
  prepare_dir(out_dir);
  const double lambda = config.lambda_fair.front();
  TheoryRunResult out;
  std::vector<double> nr, pc, au;
  json seeds_json = json::array();
  for (auto seed : config.seeds) {
    const SeedRun run = train_seed(data, config, seed, lambda);
    const Dataset message_graph = with_edges(data, run.split.train_pos);
    TheoryReport report =
        build_theory_report(run.result.best, message_graph, run.split.test_pos, run.split.test_neg);
    nr.push_back(report.nrmse.value);
    pc.push_back(report.pcc.value);
    au.push_back(report.auc.value);

    json groups = json::array();
    for (std::size_t b = 0; b < report.rho2.size(); ++b) {
      groups.push_back({{"group", b},
                        {"rho2", number_or_null(report.rho2[b])},
                        {"c1", report.c1[b]},
                        {"pairs", report.pair_count[b]}});
    }
    json sj{{"seed", seed},
            {"best_epoch", run.result.best_epoch},
            {"nrmse", metric_json(report.nrmse)},
            {"pcc", metric_json(report.pcc)},
            {"auc", metric_json(report.auc)},
            {"c2", report.c2},
            {"groups", groups},
            {"skipped_groups", report.skipped_groups}};

    if (config.spectral_diagnostics && !out_dir.empty()) {
      const WithinGroupView view = within_group_structure(message_graph);
      const NormalizedMatrix p = normalized_matrix(message_graph, config.filter);
      const NormalizedMatrix phat = normalized_matrix(message_graph, view, config.filter);
      const SpectralSummary spectrum = block_spectrum(phat, view);
      BoundSet bounds = residual_and_bounds(p, phat, spectrum, config.layers, view);
      bounds.c2 = report.c2;
      write_bounds_csv(out_dir / ("spectral_seed" + std::to_string(seed) + ".csv"), spectrum,
                       bounds);
      sj["xi_norm"] = bounds.xi_norm;
      sj["max_degree_ratio"] = bounds.degree_ratio;
    }
    seeds_json.push_back(std::move(sj));
    out.seeds.push_back(seed);
    out.reports.push_back(std::move(report));
  }
  out.nrmse = mean_std(nr);
  out.pcc = mean_std(pc);
  out.auc = mean_std(au);
  if (out_dir.empty()) return out;

  auto csv = detail::open_output(out_dir / "pairs.csv");
  csv << "seed,group,u,v,label,tau_raw,tau_fitted,gcn_score\n";
  for (std::size_t k = 0; k < out.reports.size(); ++k) {
    for (const auto& tp : out.reports[k].pairs) {
      csv << out.seeds[k] << ',' << tp.group << ',' << tp.pair.u << ',' << tp.pair.v << ','
          << tp.label << ',' << detail::fmt(tp.tau_raw) << ',' << detail::fmt(tp.tau_fitted)
          << ',' << detail::fmt(tp.gcn_score) << '\n';
    }
  }
  write_json(out_dir / "report.json", {{"command", "validate-theory"},
                                       {"config", config_json(config)},
                                       {"seeds", seeds_json},
                                       {"nrmse", mean_std_json(out.nrmse)},
                                       {"pcc", mean_std_json(out.pcc)},
                                       {"auc", mean_std_json(out.auc)}});
  return out;
}

FairnessTable run_fairness_sweep(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Dataset data = load_run_dataset(config);
  require_subgroups(data);
  prepare_dir(out_dir);
  FairnessTable table;
  table.dataset = config.dataset_name;
  table.seeds = config.seeds;
  std::vector<double> lambdas = config.lambda_fair;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  for (double lambda : lambdas) {
    SweepRow row;
    row.lambda_fair = lambda;
    for (auto seed : config.seeds) {
      const SeedRun run = train_seed(data, config, seed, lambda);
      const Dataset message_graph = with_edges(data, run.split.train_pos);
      const SubgroupView sv = subgroup_view(within_group_structure(message_graph), data);
      const NormalizedMatrix p = normalized_matrix(message_graph, config.filter);
      const Eigen::MatrixXd h = forward(run.result.best, p, message_graph.features);
      std::vector<NodePair> pairs = run.split.test_pos;
      pairs.insert(pairs.end(), run.split.test_neg.begin(), run.split.test_neg.end());
      const auto scores = score_pairs(h, pairs);
      FairnessAssessment a = delta(pairs, scores, sv, ScoreMode::post_sigmoid);
      row.seed_delta.push_back(a.mean_delta);
      row.seed_auc.push_back(run.test_auc);
      row.assessments.push_back(std::move(a));
    }
    row.mean_delta = mean_std(row.seed_delta);
    row.test_auc = mean_std(row.seed_auc);
    table.rows.push_back(std::move(row));
  }
  if (out_dir.empty()) return table;

  auto csv = detail::open_output(out_dir / "fairness_table.csv");
  csv << "dataset,lambda_fair,mean_delta,std_delta,test_auc,std_auc,seeds\n";
  auto groups_csv = detail::open_output(out_dir / "fairness_groups.csv");
  groups_csv << "lambda_fair,seed,group_id,delta,disparity,n_t1,n_t2,skipped\n";
  json rows = json::array();
  for (const auto& row : table.rows) {
    csv << table.dataset << ',' << detail::fmt(row.lambda_fair) << ','
        << detail::fmt(row.mean_delta.mean) << ',' << detail::fmt(row.mean_delta.std) << ','
        << detail::fmt(row.test_auc.mean) << ',' << detail::fmt(row.test_auc.std) << ','
        << table.seeds.size() << '\n';
    json per_seed = json::array();
    for (std::size_t k = 0; k < table.seeds.size(); ++k) {
      for (const auto& g : row.assessments[k].groups) {
        groups_csv << detail::fmt(row.lambda_fair) << ',' << table.seeds[k] << ',' << g.group
                   << ',' << detail::fmt(g.delta) << ',' << detail::fmt(g.disparity) << ','
                   << g.n_t1 << ',' << g.n_t2 << ',' << (g.skipped ? 1 : 0) << '\n';
      }
      per_seed.push_back({{"seed", table.seeds[k]},
                          {"mean_delta", row.seed_delta[k]},
                          {"test_auc", row.seed_auc[k]},
                          {"fairness", assessment_json(row.assessments[k])}});
    }
    rows.push_back({{"lambda_fair", row.lambda_fair},
                    {"mean_delta", mean_std_json(row.mean_delta)},
                    {"test_auc", mean_std_json(row.test_auc)},
                    {"seeds", per_seed}});
  }
  write_json(out_dir / "report.json", {{"command", "fairness-sweep"},
                                       {"config", config_json(config)},
                                       {"dataset", table.dataset},
                                       {"seeds", table.seeds},
                                       {"rows", rows}});
  return table;
}

DeltaComparison run_delta_comparison(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Dataset data = load_run_dataset(config);
  require_subgroups(data);
  prepare_dir(out_dir);
  const double lambda = config.lambda_fair.front();
  DeltaComparison out;
  json seeds_json = json::array();
  for (auto seed : config.seeds) {
    const SeedRun run = train_seed(data, config, seed, lambda);
    const Dataset message_graph = with_edges(data, run.split.train_pos);
    const WithinGroupView view = within_group_structure(message_graph);
    const SubgroupView sv = subgroup_view(view, data);
    const TheoryReport report =
        build_theory_report(run.result.best, message_graph, run.split.test_pos, run.split.test_neg);

    std::vector<NodePair> pairs;
    std::vector<double> trained, fitted;
    for (const auto& tp : report.pairs) {
      pairs.push_back(tp.pair);
      trained.push_back(tp.gcn_score);
      fitted.push_back(tp.tau_fitted);
    }
    const FairnessAssessment d = delta(pairs, trained, sv, ScoreMode::post_sigmoid);
    const FairnessAssessment d_emp = delta(pairs, fitted, sv, ScoreMode::post_sigmoid);
    const FairnessAssessment d_closed =
        delta_hat(view, report.rho2, report.c1, *data.t_labels, config.filter);

    for (std::size_t b = 0; b < d.groups.size(); ++b) {
      if (d.groups[b].skipped || d_emp.groups[b].skipped) continue;
      DeltaRow row;
      row.seed = seed;
      row.group = static_cast<int>(b);
      row.delta = d.groups[b].delta;
      row.delta_hat = d_emp.groups[b].delta;
      row.delta_hat_closed = d_closed.groups[b].skipped ? std::nan("") : d_closed.groups[b].delta_hat;
      out.rows.push_back(row);
    }
    seeds_json.push_back({{"seed", seed},
                          {"delta", assessment_json(d)},
                          {"delta_hat_empirical", assessment_json(d_emp)},
                          {"delta_hat_closed_form", assessment_json(d_closed)}});
  }
  std::vector<double> dv, dh;
  for (const auto& r : out.rows) {
    dv.push_back(r.delta);
    dh.push_back(r.delta_hat);
  }
  if (dv.size() >= 2) {
    out.pcc = pcc(dh, dv);
    out.nrmse = nrmse(dh, dv);
  } else {
    out.pcc = {"pcc", std::nan(""), dv.size(), {"undefined"}};
    out.nrmse = {"nrmse", std::nan(""), dv.size(), {"undefined"}};
  }
  if (out_dir.empty()) return out;

  auto csv = detail::open_output(out_dir / "delta_scatter.csv");
  csv << "seed,group,delta,delta_hat,delta_hat_closed\n";
  for (const auto& r : out.rows) {
    csv << r.seed << ',' << r.group << ',' << detail::fmt(r.delta) << ','
        << detail::fmt(r.delta_hat) << ',' << detail::fmt(r.delta_hat_closed) << '\n';
  }
  write_json(out_dir / "report.json", {{"command", "delta-compare"},
                                       {"config", config_json(config)},
                                       {"pcc", metric_json(out.pcc)},
                                       {"nrmse", metric_json(out.nrmse)},
                                       {"rows", out.rows.size()},
                                       {"seeds", seeds_json}});
  return out;
}

}  // namespace gcnfair
