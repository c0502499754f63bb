#include "gcnfair/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <unordered_set>

#include "gcnfair/error.hpp"
#include "gcnfair/metrics.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace gcnfair {

namespace {

class PairSet {
 public:
  explicit PairSet(std::size_t n) : n_(n) {}

  bool insert(NodePair p) { return set_.insert(key(p)).second; }
  bool contains(NodePair p) const { return set_.count(key(p)) != 0; }
  std::size_t size() const noexcept { return set_.size(); }

 private:
  std::uint64_t key(NodePair p) const {
    const NodePair c = canonical(p.u, p.v);
    return static_cast<std::uint64_t>(c.u) * n_ + c.v;
  }
  std::size_t n_;
  std::unordered_set<std::uint64_t> set_;
};

// Draws `count` distinct canonical non-self pairs outside `forbidden`, and
// adds them to it.
std::vector<NodePair> draw_non_edges(std::size_t n, PairSet& forbidden, std::size_t count,
                                     std::mt19937_64& rng) {
  const double total = static_cast<double>(n) * static_cast<double>(n > 0 ? n - 1 : 0) / 2.0;
  const double capacity = total - static_cast<double>(forbidden.size());
  if (static_cast<double>(count) > capacity) {
    throw Error(ErrorCode::insufficient_non_edges,
                "requested " + std::to_string(count) + " non-edges but only " +
                    std::to_string(static_cast<long long>(capacity)) + " exist");
  }
  std::vector<NodePair> out;
  out.reserve(count);
  if (count == 0) return out;

  if (capacity <= 4.0 * static_cast<double>(count)) {
    // Dense regime: enumerate the candidates and take a random subset.
    std::vector<NodePair> candidates;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (!forbidden.contains({u, v})) candidates.push_back({u, v});
      }
    }
    for (std::size_t k = 0; k < count; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, candidates.size() - 1);
      std::swap(candidates[k], candidates[pick(rng)]);
      out.push_back(candidates[k]);
      forbidden.insert(candidates[k]);
    }
    return out;
  }

  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  while (out.size() < count) {
    const NodeId a = node(rng);
    const NodeId b = node(rng);
    if (a == b) continue;
    const NodePair p = canonical(a, b);
    if (forbidden.insert(p)) out.push_back(p);
  }
  return out;
}

struct Trace {
  std::vector<Eigen::MatrixXd> inputs;  // H_{l-1}
  std::vector<Eigen::MatrixXd> pre;     // Z_l
};

void check_forward_inputs(const Model& model, const NormalizedMatrix& p, const Eigen::MatrixXd& x) {
  if (model.weights.empty()) throw Error(ErrorCode::invalid_argument, "model has no layers");
  if (p.kind != model.filter) {
    throw Error(ErrorCode::invalid_argument,
                std::string("model uses the ") + to_string(model.filter) +
                    " filter but the matrix is " + to_string(p.kind));
  }
  if (static_cast<std::size_t>(x.rows()) != p.n()) {
    throw Error(ErrorCode::dimension_mismatch, "feature rows do not match the graph size");
  }
  if (static_cast<std::size_t>(x.cols()) != model.input_dim()) {
    throw Error(ErrorCode::dimension_mismatch,
                "feature dim " + std::to_string(x.cols()) + " does not match model input dim " +
                    std::to_string(model.input_dim()));
  }
}

Eigen::MatrixXd run_forward(const Model& model, const NormalizedMatrix& p,
                            const Eigen::MatrixXd& x, Trace* trace) {
  check_forward_inputs(model, p, x);
  const int layers = model.layers();
  Eigen::MatrixXd h = x;
  for (int l = 0; l < layers; ++l) {
    // P (H W^T) == (P H) W^T; the right-hand product is narrower.
    Eigen::MatrixXd z = p.matrix.multiply((h * model.weights[l].transpose()).eval());
    const bool relu = l + 1 < layers && !model.identity_activations;
    if (trace) {
      trace->inputs.push_back(std::move(h));
      trace->pre.push_back(z);
    }
    h = relu ? z.cwiseMax(0.0) : std::move(z);
  }
  return h;
}

double softplus(double s) { return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))); }

}  // namespace

std::vector<int> default_layer_dims(int layers) {
  if (layers < 1) throw Error(ErrorCode::invalid_argument, "layer count must be >= 1");
  std::vector<int> dims(static_cast<std::size_t>(layers), 128);
  dims.back() = 64;
  return dims;
}

Model init_model(std::size_t feature_dim, std::span<const int> layer_dims, FilterKind filter,
                 std::uint64_t seed) {
  if (feature_dim == 0) throw Error(ErrorCode::invalid_argument, "feature_dim must be >= 1");
  if (layer_dims.empty()) throw Error(ErrorCode::invalid_argument, "at least one layer required");
  Model model;
  model.filter = filter;
  model.seed = seed;
  std::mt19937_64 rng(seed);
  Eigen::Index in = static_cast<Eigen::Index>(feature_dim);
  for (int out_dim : layer_dims) {
    if (out_dim <= 0) throw Error(ErrorCode::invalid_argument, "zero-sized layer");
    const Eigen::Index out = out_dim;
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> unif(-limit, limit);
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) w(r, c) = unif(rng);
    }
    model.weights.push_back(std::move(w));
    in = out;
  }
  return model;
}

Eigen::MatrixXd forward(const Model& model, const NormalizedMatrix& p, const Eigen::MatrixXd& x) {
  return run_forward(model, p, x, nullptr);
}

std::vector<double> score_pairs(const Eigen::MatrixXd& h, std::span<const NodePair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& pr : pairs) {
    if (pr.u >= h.rows() || pr.v >= h.rows()) {
      throw Error(ErrorCode::out_of_range, "pair endpoint outside the representation matrix");
    }
    // Same accumulation order for (i, j) and (j, i): sum of h_u[k] * h_v[k].
    double s = 0.0;
    for (Eigen::Index k = 0; k < h.cols(); ++k) s += h(pr.u, k) * h(pr.v, k);
    out.push_back(s);
  }
  return out;
}

std::vector<double> score_pairs_sigmoid(const Eigen::MatrixXd& h, std::span<const NodePair> pairs) {
  auto s = score_pairs(h, pairs);
  for (double& v : s) v = sigmoid(v);
  return s;
}

LinkSplit split_links(std::size_t n, const std::vector<NodePair>& edges, SplitRatios ratios,
                      std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw Error(ErrorCode::invalid_argument, "split ratios must sum to 1");
  }
  std::vector<NodePair> shuffled;
  shuffled.reserve(edges.size());
  for (const auto& e : edges) shuffled.push_back(canonical(e.u, e.v));
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  const std::size_t m = shuffled.size();
  const auto n_val = static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(m)));
  const auto n_test = static_cast<std::size_t>(std::llround(ratios[2] * static_cast<double>(m)));
  if (n_val + n_test > m) throw Error(ErrorCode::invalid_argument, "too few edges to split");
  const std::size_t n_train = m - n_val - n_test;

  LinkSplit split;
  split.seed = seed;
  split.train_pos.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val_pos.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train),
                       shuffled.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test_pos.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                        shuffled.end());

  PairSet forbidden(n);
  for (const auto& e : shuffled) forbidden.insert(e);
  split.val_neg = draw_non_edges(n, forbidden, n_val, rng);
  split.test_neg = draw_non_edges(n, forbidden, n_test, rng);
  return split;
}

std::vector<NodePair> sample_negatives(const Dataset& data, std::size_t count, std::uint64_t seed,
                                       std::span<const NodePair> exclusions) {
  PairSet forbidden(data.n);
  for (const auto& e : data.edges) forbidden.insert(e);
  for (const auto& e : exclusions) {
    if (e.u != e.v) forbidden.insert(e);
  }
  std::mt19937_64 rng(seed);
  return draw_non_edges(data.n, forbidden, count, rng);
}

LossResult loss_and_gradients(const Model& model, const NormalizedMatrix& p,
                              const Eigen::MatrixXd& x, std::span<const NodePair> pos,
                              std::span<const NodePair> neg, double lambda_fair,
                              const SubgroupView* groups) {
  if (pos.empty() || neg.empty()) {
    throw Error(ErrorCode::invalid_argument, "loss needs non-empty positive and negative pairs");
  }
  if (lambda_fair < 0.0) throw Error(ErrorCode::invalid_argument, "lambda_fair must be >= 0");
  if (lambda_fair > 0.0 && groups == nullptr) {
    throw Error(ErrorCode::missing_labels, "fairness regularizer needs subgroup labels");
  }

  Trace trace;
  const Eigen::MatrixXd h = run_forward(model, p, x, &trace);

  std::vector<NodePair> pairs(pos.begin(), pos.end());
  pairs.insert(pairs.end(), neg.begin(), neg.end());
  const std::vector<double> scores = score_pairs(h, pairs);
  const double count = static_cast<double>(pairs.size());

  LossResult out;
  std::vector<double> grad(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double y = k < pos.size() ? 1.0 : 0.0;
    out.bce += softplus(scores[k]) - y * scores[k];
    grad[k] = (sigmoid(scores[k]) - y) / count;
  }
  out.bce /= count;

  if (lambda_fair > 0.0) {
    std::vector<double> probs(scores.size());
    for (std::size_t k = 0; k < scores.size(); ++k) probs[k] = sigmoid(scores[k]);
    const DeltaGradient dg = delta_with_gradient(pairs, probs, *groups);
    std::vector<double> deltas;
    for (const auto& g : dg.assessment.groups) {
      if (!g.skipped) deltas.push_back(g.delta);
    }
    out.reg = regularizer_term(deltas, lambda_fair);
    if (!deltas.empty()) {
      const double scale = lambda_fair / static_cast<double>(deltas.size());
      for (std::size_t k = 0; k < scores.size(); ++k) {
        grad[k] += scale * dg.d_sum[k] * probs[k] * (1.0 - probs[k]);
      }
    }
  }
  out.loss = out.bce + out.reg;

  // Backpropagate through the inner products and the layer chain.
  Eigen::MatrixXd d_h = Eigen::MatrixXd::Zero(h.rows(), h.cols());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    d_h.row(pairs[k].u) += grad[k] * h.row(pairs[k].v);
    d_h.row(pairs[k].v) += grad[k] * h.row(pairs[k].u);
  }
  const int layers = model.layers();
  out.gradients.resize(static_cast<std::size_t>(layers));
  for (int l = layers - 1; l >= 0; --l) {
    Eigen::MatrixXd d_z = std::move(d_h);
    if (l + 1 < layers && !model.identity_activations) {
      d_z = (trace.pre[l].array() > 0.0).select(d_z, 0.0);
    }
    const Eigen::MatrixXd g = p.matrix.multiply_transpose(d_z);  // P^T dZ
    out.gradients[l] = g.transpose() * trace.inputs[l];
    if (l > 0) d_h = g * model.weights[l];
  }
  return out;
}

double link_auc(const Model& model, const NormalizedMatrix& p, const Eigen::MatrixXd& x,
                std::span<const NodePair> pos, std::span<const NodePair> neg) {
  const Eigen::MatrixXd h = forward(model, p, x);
  const auto sp = score_pairs(h, pos);
  const auto sn = score_pairs(h, neg);
  return roc_auc(sp, sn).value;
}

TrainResult train(Model model, const Dataset& data, const LinkSplit& split,
                  const TrainConfig& config) {
  if (config.epochs < 1) throw Error(ErrorCode::invalid_argument, "epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "learning rate must be > 0");
  }
  if (config.lambda_fair < 0.0) throw Error(ErrorCode::invalid_argument, "lambda_fair must be >= 0");
  if (split.train_pos.empty() || split.val_pos.empty() || split.val_neg.empty()) {
    throw Error(ErrorCode::invalid_argument, "split has no training or validation links");
  }

  const Dataset message_graph = with_edges(data, split.train_pos);
  const NormalizedMatrix p = normalized_matrix(message_graph, model.filter);
  std::optional<SubgroupView> groups;
  if (config.lambda_fair > 0.0) {
    groups = subgroup_view(within_group_structure(message_graph), data);
  }

  std::mt19937_64 rng(config.seed ^ 0x5bd1e9955bd1e995ULL);
  const auto neg_count = static_cast<std::size_t>(
      std::llround(config.negative_ratio * static_cast<double>(split.train_pos.size())));

  std::vector<Eigen::MatrixXd> m1, m2;
  for (const auto& w : model.weights) {
    m1.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    m2.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }

  TrainResult result;
  result.best = model;
  result.best_val_auc = -std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    PairSet forbidden(data.n);
    for (const auto& e : split.train_pos) forbidden.insert(e);
    const auto neg = draw_non_edges(data.n, forbidden, neg_count, rng);

    const LossResult lr = loss_and_gradients(model, p, message_graph.features, split.train_pos,
                                             neg, config.lambda_fair,
                                             groups ? &*groups : nullptr);
    const double bc1 = 1.0 - std::pow(config.beta1, epoch);
    const double bc2 = 1.0 - std::pow(config.beta2, epoch);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      const auto& g = lr.gradients[l];
      m1[l] = config.beta1 * m1[l] + (1.0 - config.beta1) * g;
      m2[l] = config.beta2 * m2[l] + (1.0 - config.beta2) * g.cwiseProduct(g);
      model.weights[l].array() -= config.learning_rate * (m1[l].array() / bc1) /
                                  ((m2[l].array() / bc2).sqrt() + config.epsilon);
    }

    const double auc = link_auc(model, p, message_graph.features, split.val_pos, split.val_neg);
    result.history.push_back({epoch, lr.loss, lr.reg, auc});
    if (auc > result.best_val_auc) {
      result.best_val_auc = auc;
      result.best_epoch = epoch;
      result.best = model;
    }
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  auto out = detail::open_output(path);
  out << "epoch,train_loss,reg_term,val_auc\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << detail::fmt(r.train_loss) << ',' << detail::fmt(r.reg_term) << ','
        << detail::fmt(r.val_auc) << '\n';
  }
}

namespace {
constexpr const char* kCheckpointFormat = "gcnfair-model";
constexpr int kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const TrainConfig& config) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["filter"] = short_name(model.filter);
  j["identity_activations"] = model.identity_activations;
  j["seed"] = model.seed;
  std::vector<long long> dims{static_cast<long long>(model.input_dim())};
  auto& weights = j["weights"] = nlohmann::json::array();
  for (const auto& w : model.weights) {
    dims.push_back(w.rows());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    weights.push_back(std::move(flat));
  }
  j["dims"] = dims;
  j["config"] = {{"epochs", config.epochs},
                 {"learning_rate", config.learning_rate},
                 {"beta1", config.beta1},
                 {"beta2", config.beta2},
                 {"epsilon", config.epsilon},
                 {"negative_ratio", config.negative_ratio},
                 {"lambda_fair", config.lambda_fair},
                 {"seed", config.seed}};
  auto out = detail::open_output(path);
  out << j.dump(2) << '\n';
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat || j.value("version", 0) != kCheckpointVersion) {
    throw Error(ErrorCode::parse_error, path.string() + ": not a version 1 model checkpoint");
  }
  Model model;
  model.filter = parse_filter(j.at("filter").get<std::string>());
  model.identity_activations = j.value("identity_activations", false);
  model.seed = j.value("seed", std::uint64_t{0});
  const auto dims = j.at("dims").get<std::vector<long long>>();
  const auto& weights = j.at("weights");
  if (dims.size() != weights.size() + 1 || weights.empty()) {
    throw Error(ErrorCode::parse_error, path.string() + ": dims and weights disagree");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto flat = weights[l].get<std::vector<double>>();
    const Eigen::Index rows = dims[l + 1], cols = dims[l];
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
      throw Error(ErrorCode::parse_error, path.string() + ": weight size mismatch");
    }
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
    model.weights.push_back(std::move(w));
  }
  return model;
}

}  // namespace gcnfair
