#include "gcnfair/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "gcnfair/error.hpp"

namespace gcnfair {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_int(std::string_view tok, long long& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return in;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

}  // namespace

FeatureNorm parse_feature_norm(const std::string& name) {
  if (name == "none") return FeatureNorm::none;
  if (name == "row_sum_one" || name == "row") return FeatureNorm::row_sum_one;
  if (name == "minmax_signed" || name == "minmax") return FeatureNorm::minmax_signed;
  throw Error(ErrorCode::invalid_argument, "unknown feature normalization '" + name + "'");
}

const char* to_string(FeatureNorm mode) noexcept {
  switch (mode) {
    case FeatureNorm::none: return "none";
    case FeatureNorm::row_sum_one: return "row_sum_one";
    case FeatureNorm::minmax_signed: return "minmax_signed";
  }
  return "none";
}

Dataset make_dataset(std::size_t n, const std::vector<NodePair>& edges,
                     Eigen::MatrixXd features, std::vector<int> s_labels,
                     std::optional<std::vector<int>> t_labels,
                     double self_loop_weight) {
  if (!(self_loop_weight >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "self_loop_weight must be >= 0");
  }
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw Error(ErrorCode::dimension_mismatch,
                "feature row count " + std::to_string(features.rows()) +
                    " does not match node count " + std::to_string(n));
  }
  if (s_labels.size() != n) {
    throw Error(ErrorCode::missing_labels, "expected one group label per node");
  }
  if (t_labels && t_labels->size() != n) {
    throw Error(ErrorCode::missing_labels, "expected one subgroup label per node");
  }

  Dataset data;
  data.n = n;
  data.self_loop_weight = self_loop_weight;
  data.edges.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw Error(ErrorCode::out_of_range,
                  "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                      ") has an endpoint >= n = " + std::to_string(n));
    }
    if (e.u == e.v) {
      ++data.dropped_duplicates;
      continue;
    }
    data.edges.push_back(canonical(e.u, e.v));
  }
  std::sort(data.edges.begin(), data.edges.end());
  const auto tail = std::unique(data.edges.begin(), data.edges.end());
  data.dropped_duplicates += static_cast<std::size_t>(data.edges.end() - tail);
  data.edges.erase(tail, data.edges.end());

  int max_s = -1;
  for (int s : s_labels) {
    if (s < 0) throw Error(ErrorCode::missing_labels, "negative group label");
    max_s = std::max(max_s, s);
  }
  for (int s = 0; s <= max_s; ++s) data.s_names.push_back(std::to_string(s));
  if (t_labels) {
    int max_t = -1;
    for (int t : *t_labels) {
      if (t < 0 || t > 1) {
        throw Error(ErrorCode::invalid_argument, "subgroup labels must be 0 or 1");
      }
      max_t = std::max(max_t, t);
    }
    for (int t = 0; t <= max_t; ++t) data.t_names.push_back(std::to_string(t));
  }
  data.features = std::move(features);
  data.s_labels = std::move(s_labels);
  data.t_labels = std::move(t_labels);
  return data;
}

Dataset with_edges(const Dataset& base, const std::vector<NodePair>& edges) {
  Dataset out = make_dataset(base.n, edges, base.features, base.s_labels,
                             base.t_labels, base.self_loop_weight);
  out.s_names = base.s_names;
  out.t_names = base.t_names;
  out.degenerate_feature_rows = base.degenerate_feature_rows;
  return out;
}

Dataset load_dataset(const std::filesystem::path& edge_path,
                     const std::filesystem::path& feature_path,
                     const std::filesystem::path& label_path,
                     const LoadOptions& options) {
  // Labels fix n: node ids must cover 0..n-1 exactly once.
  std::vector<std::pair<long long, std::pair<std::string, std::string>>> rows;
  bool any_t = false;
  {
    auto in = open_input(label_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto body = trim(line);
      if (body.empty() || body.front() == '#') continue;
      auto cols = split_on(body, '\t');
      if (cols.size() == 1) cols = split_ws(body);
      long long id = 0;
      if (!parse_int(cols[0], id)) {
        if (rows.empty() && cols[0] == "node_id") continue;  // header
        throw Error(ErrorCode::parse_error, where(label_path, lineno) + ": bad node id");
      }
      if (cols.size() < 2 || cols[1].empty()) {
        throw Error(ErrorCode::missing_labels,
                    where(label_path, lineno) + ": missing group label for node " +
                        std::to_string(id));
      }
      const bool has_t = cols.size() >= 3 && !cols[2].empty();
      any_t = any_t || has_t;
      rows.push_back({id, {std::string(cols[1]), has_t ? std::string(cols[2]) : ""}});
    }
  }
  const std::size_t n = rows.size();
  std::vector<int> s_labels(n, -1);
  std::vector<int> t_labels(n, -1);
  std::vector<std::string> s_names, t_names;
  std::unordered_map<std::string, int> s_ids, t_ids;
  for (const auto& [id, labels] : rows) {
    if (id < 0 || static_cast<std::size_t>(id) >= n) {
      throw Error(ErrorCode::missing_labels,
                  "label rows do not cover nodes 0.." + std::to_string(n ? n - 1 : 0) +
                      " (saw id " + std::to_string(id) + ")");
    }
    if (s_labels[id] != -1) {
      throw Error(ErrorCode::parse_error, "duplicate label row for node " + std::to_string(id));
    }
    auto [it, inserted] = s_ids.try_emplace(labels.first, static_cast<int>(s_names.size()));
    if (inserted) s_names.push_back(labels.first);
    s_labels[id] = it->second;
    if (any_t) {
      if (labels.second.empty()) {
        throw Error(ErrorCode::missing_labels,
                    "node " + std::to_string(id) + " has no subgroup label");
      }
      auto [jt, tnew] = t_ids.try_emplace(labels.second, static_cast<int>(t_names.size()));
      if (tnew) t_names.push_back(labels.second);
      t_labels[id] = jt->second;
    }
  }
  if (t_names.size() > 2) {
    throw Error(ErrorCode::invalid_argument, "subgroup labels must take at most 2 values");
  }

  std::vector<std::vector<double>> feature_rows;
  {
    auto in = open_input(feature_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto body = trim(line);
      if (body.empty()) continue;
      std::vector<double> row;
      for (auto tok : split_on(body, ',')) {
        double x = 0.0;
        if (!parse_double(tok, x)) {
          throw Error(ErrorCode::parse_error,
                      where(feature_path, lineno) + ": non-numeric feature '" +
                          std::string(tok) + "'");
        }
        row.push_back(x);
      }
      if (!feature_rows.empty() && row.size() != feature_rows.front().size()) {
        throw Error(ErrorCode::parse_error, where(feature_path, lineno) + ": ragged row");
      }
      feature_rows.push_back(std::move(row));
    }
  }
  if (feature_rows.size() != n) {
    throw Error(ErrorCode::dimension_mismatch,
                "feature file has " + std::to_string(feature_rows.size()) +
                    " rows but there are " + std::to_string(n) + " labelled nodes");
  }
  const std::size_t d = n ? feature_rows.front().size() : 0;
  Eigen::MatrixXd features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) features(i, k) = feature_rows[i][k];
  }

  std::vector<NodePair> edges;
  {
    auto in = open_input(edge_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto body = trim(line);
      if (body.empty() || body.front() == '#') continue;
      const auto toks = split_ws(body);
      long long a = 0, b = 0;
      if (toks.size() != 2 || !parse_int(toks[0], a) || !parse_int(toks[1], b)) {
        throw Error(ErrorCode::parse_error, where(edge_path, lineno) + ": expected two node ids");
      }
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n ||
          static_cast<std::size_t>(b) >= n) {
        throw Error(ErrorCode::out_of_range,
                    where(edge_path, lineno) + ": endpoint out of range for n = " +
                        std::to_string(n));
      }
      edges.push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
    }
  }

  auto normalized = normalize_features(features, options.normalization);
  Dataset data = make_dataset(n, edges, std::move(normalized.values), std::move(s_labels),
                              any_t ? std::optional(std::move(t_labels)) : std::nullopt,
                              options.self_loop_weight);
  data.s_names = std::move(s_names);
  data.t_names = std::move(t_names);
  data.degenerate_feature_rows = std::move(normalized.degenerate);
  return data;
}

void write_dataset(const Dataset& data, const std::filesystem::path& edge_path,
                   const std::filesystem::path& feature_path,
                   const std::filesystem::path& label_path) {
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + p.string());
    return out;
  };
  {
    auto out = open(edge_path);
    for (const auto& e : data.edges) out << e.u << ' ' << e.v << '\n';
  }
  {
    auto out = open(feature_path);
    char buf[32];
    for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
      for (Eigen::Index k = 0; k < data.features.cols(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", data.features(i, k));
        if (k) out << ',';
        out << buf;
      }
      out << '\n';
    }
  }
  {
    auto out = open(label_path);
    for (std::size_t i = 0; i < data.n; ++i) {
      out << i << '\t' << data.s_names.at(data.s_labels[i]);
      if (data.t_labels) out << '\t' << data.t_names.at((*data.t_labels)[i]);
      out << '\n';
    }
  }
}

std::vector<double> full_degrees(const Dataset& data) {
  std::vector<double> deg(data.n, data.self_loop_weight);
  for (const auto& e : data.edges) {
    deg[e.u] += 1.0;
    deg[e.v] += 1.0;
  }
  return deg;
}

WithinGroupView within_group_structure(const Dataset& data) {
  WithinGroupView view;
  const std::size_t n = data.n;
  view.wg_degrees.assign(n, data.self_loop_weight);
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& e : data.edges) {
    if (data.s_labels[e.u] != data.s_labels[e.v]) continue;
    view.wg_edges.push_back(e);
    view.wg_degrees[e.u] += 1.0;
    view.wg_degrees[e.v] += 1.0;
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }

  // Connected components of the within-group graph; scanning nodes in
  // ascending order numbers groups by their smallest member.
  view.group_of.assign(n, -1);
  std::vector<NodeId> stack;
  for (NodeId start = 0; start < n; ++start) {
    if (view.group_of[start] != -1) continue;
    const int gid = view.num_groups();
    std::vector<NodeId> members;
    view.group_of[start] = gid;
    stack.push_back(start);
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      members.push_back(u);
      for (NodeId v : adj[u]) {
        if (view.group_of[v] == -1) {
          view.group_of[v] = gid;
          stack.push_back(v);
        }
      }
    }
    std::sort(members.begin(), members.end());
    double vol = 0.0;
    for (NodeId u : members) vol += view.wg_degrees[u];
    if (members.size() == 1) view.singleton_groups.push_back(gid);
    view.groups.push_back(std::move(members));
    view.volumes.push_back(vol);
    view.source_label.push_back(data.s_labels[start]);
  }
  return view;
}

NormalizedFeatures normalize_features(const Eigen::MatrixXd& features, FeatureNorm mode) {
  NormalizedFeatures out{features, {}};
  auto& x = out.values;
  switch (mode) {
    case FeatureNorm::none:
      break;
    case FeatureNorm::row_sum_one:
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double sum = x.row(i).sum();
        if (sum == 0.0) {
          out.degenerate.push_back(static_cast<std::size_t>(i));
          continue;
        }
        x.row(i) /= sum;
      }
      break;
    case FeatureNorm::minmax_signed:
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        if (x.rows() == 0) break;
        const double lo = x.col(k).minCoeff();
        const double hi = x.col(k).maxCoeff();
        if (!(hi > lo)) {
          out.degenerate.push_back(static_cast<std::size_t>(k));
          continue;
        }
        x.col(k) = ((x.col(k).array() - lo) * (2.0 / (hi - lo)) - 1.0).matrix();
      }
      break;
  }
  return out;
}

}  // namespace gcnfair
