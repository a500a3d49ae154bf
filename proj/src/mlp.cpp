#include "aoiopt/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "aoiopt/errors.hpp"

namespace aoiopt {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double squash(double raw) {
  const double r = raw > 0.0 ? raw : 0.0;
  return r / (r + 1.0);
}

std::vector<Index> col_range(Index begin, Index end) {
  std::vector<Index> cols(static_cast<std::size_t>(end - begin));
  std::iota(cols.begin(), cols.end(), begin);
  return cols;
}

void check_layers(const Mlp& mlp, const Scenario& sc) {
  if (mlp.input_width() != feature_width(sc) || mlp.output_width() != decision_width(sc)) {
    throw ArgumentError("network widths do not match the scenario (input " +
                        std::to_string(mlp.input_width()) + " vs " +
                        std::to_string(feature_width(sc)) + ", output " +
                        std::to_string(mlp.output_width()) + " vs " +
                        std::to_string(decision_width(sc)) + ")");
  }
}

// Raw network output for every row of `theta`.
Mat raw_output(const Mlp& mlp, const Mat& theta) {
  if (theta.cols() != static_cast<Index>(mlp.input_width())) {
    throw ArgumentError("feature width " + std::to_string(theta.cols()) + " does not match input layer " +
                        std::to_string(mlp.input_width()));
  }
  Mat h = theta;
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    Mat z = h * mlp.weights[l];
    z.rowwise() += mlp.biases[l].row(0);
    if (l + 1 < mlp.weights.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Decision decode_row(const Scenario& sc, const Mat& raw, Index row) {
  const std::size_t nu = sc.num_uavs, nt = sc.horizon, ni = sc.num_devices;
  const std::size_t n_ut = nu * nt;
  Decision d{UavPath::constant(nu, nt, 0.0, 0.0), SelectionProbs::constant(ni, nu, nt, 0.0)};
  for (std::size_t k = 0; k < n_ut; ++k) {
    d.path.xs.flat()[k] = squash(raw(row, static_cast<Index>(k))) * sc.area_x;
    d.path.ys.flat()[k] = squash(raw(row, static_cast<Index>(n_ut + k))) * sc.area_y;
  }
  for (std::size_t k = 0; k < ni * n_ut; ++k) {
    d.probs.p.flat()[k] = sigmoid(raw(row, static_cast<Index>(2 * n_ut + k)));
  }
  return d;
}

nlohmann::json matrix_json(const Mat& m) {
  return {{"shape", {m.rows(), m.cols()}},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Mat matrix_from_json(const nlohmann::json& j, Index rows, Index cols) {
  const auto shape = j.at("shape").get<std::vector<Index>>();
  if (shape != std::vector<Index>{rows, cols}) throw ConfigError("checkpoint matrix shape mismatch");
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != rows * cols) throw ConfigError("checkpoint data length mismatch");
  Mat m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

}  // namespace

Mlp Mlp::init(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  Mlp mlp = zeros(std::move(layer_sizes));
  mlp.seed = seed;
  Rng rng(seed);
  for (auto& w : mlp.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Index k = 0; k < w.size(); ++k) w.data()[k] = dist(rng);
  }
  return mlp;
}

Mlp Mlp::zeros(std::vector<std::size_t> layer_sizes) {
  if (layer_sizes.size() < 2) throw ArgumentError("network needs at least input and output layers");
  for (auto s : layer_sizes) {
    if (s == 0) throw ArgumentError("layer width must be >= 1");
  }
  Mlp mlp;
  mlp.layer_sizes = std::move(layer_sizes);
  for (std::size_t l = 0; l + 1 < mlp.layer_sizes.size(); ++l) {
    const auto in = static_cast<Index>(mlp.layer_sizes[l]);
    const auto out = static_cast<Index>(mlp.layer_sizes[l + 1]);
    mlp.weights.push_back(Mat::Zero(in, out));
    mlp.biases.push_back(Mat::Zero(1, out));
  }
  return mlp;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

void Mlp::validate() const {
  if (layer_sizes.size() < 2 || weights.size() != layer_sizes.size() - 1 ||
      biases.size() != weights.size()) {
    throw ArgumentError("inconsistent layer count");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto in = static_cast<Index>(layer_sizes[l]);
    const auto out = static_cast<Index>(layer_sizes[l + 1]);
    if (weights[l].rows() != in || weights[l].cols() != out || biases[l].rows() != 1 ||
        biases[l].cols() != out) {
      throw ArgumentError("layer " + std::to_string(l) + " has incompatible dimensions");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw ArgumentError("layer " + std::to_string(l) + " has non-finite parameters");
    }
  }
}

bool Mlp::operator==(const Mlp& other) const {
  if (layer_sizes != other.layer_sizes || seed != other.seed ||
      weights.size() != other.weights.size()) {
    return false;
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
  }
  return true;
}

std::vector<std::size_t> desk_hidden_layers() { return {64, 128, 256, 512}; }
std::vector<std::size_t> paper_hidden_layers() { return {600, 1200, 2400, 4800}; }

std::size_t feature_width(const Scenario& sc) {
  const std::size_t i = sc.num_devices, u = sc.num_uavs, t = sc.horizon;
  return 3 * i + i * u + i * u * t;
}

std::size_t decision_width(const Scenario& sc) {
  const std::size_t i = sc.num_devices, u = sc.num_uavs, t = sc.horizon;
  return 2 * u * t + i * u * t;
}

std::vector<std::size_t> layer_sizes_for(const Scenario& sc, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> sizes{feature_width(sc)};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(decision_width(sc));
  return sizes;
}

std::vector<double> make_features(const Scenario& sc, const FadingDraw& draw) {
  if (draw.gain_sq.dims() != std::array<std::size_t, 3>{sc.num_devices, sc.num_uavs, sc.horizon}) {
    throw ArgumentError("fading draw shape does not match scenario");
  }
  const double p_max = *std::ranges::max_element(sc.tx_power);
  const double b_max = *std::ranges::max_element(sc.bandwidth.flat());
  std::vector<double> theta;
  theta.reserve(feature_width(sc));
  for (const auto& pos : sc.device_pos) {
    theta.push_back(pos.x / sc.area_x);
    theta.push_back(pos.y / sc.area_y);
  }
  for (double p : sc.tx_power) theta.push_back(p / p_max);
  for (double b : sc.bandwidth.flat()) theta.push_back(b / b_max);
  theta.insert(theta.end(), draw.gain_sq.flat().begin(), draw.gain_sq.flat().end());
  return theta;
}

Mat feature_matrix(const Scenario& sc, std::span<const FadingDraw* const> draws) {
  Mat m(static_cast<Index>(draws.size()), static_cast<Index>(feature_width(sc)));
  for (std::size_t r = 0; r < draws.size(); ++r) {
    const auto theta = make_features(sc, *draws[r]);
    std::copy(theta.begin(), theta.end(), m.row(static_cast<Index>(r)).begin());
  }
  return m;
}

Decision forward(const Mlp& mlp, const Scenario& sc, std::span<const double> theta) {
  check_layers(mlp, sc);
  Mat row(1, static_cast<Index>(theta.size()));
  std::copy(theta.begin(), theta.end(), row.data());
  return decode_row(sc, raw_output(mlp, row), 0);
}

std::vector<Decision> forward_batch(const Mlp& mlp, const Scenario& sc, const Mat& theta) {
  check_layers(mlp, sc);
  const Mat raw = raw_output(mlp, theta);
  std::vector<Decision> out;
  out.reserve(static_cast<std::size_t>(raw.rows()));
  for (Index r = 0; r < raw.rows(); ++r) out.push_back(decode_row(sc, raw, r));
  return out;
}

std::vector<Var> bind_parameters(Tape& tape, const Mlp& mlp) {
  std::vector<Var> params;
  params.reserve(2 * mlp.weights.size());
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    params.push_back(tape.leaf(mlp.weights[l]));
    params.push_back(tape.leaf(mlp.biases[l]));
  }
  return params;
}

PolicyNodes forward_on_tape(Tape& tape, std::span<const Var> params, Var input,
                            const Scenario& sc) {
  if (params.size() < 2 || params.size() % 2 != 0) throw ArgumentError("parameter list must be W,b pairs");
  Var h = input;
  const std::size_t n_layers = params.size() / 2;
  for (std::size_t l = 0; l < n_layers; ++l) {
    h = tape.matmul(h, params[2 * l]) + params[2 * l + 1];
    if (l + 1 < n_layers) h = tape.relu(h);
  }
  const auto n_ut = static_cast<Index>(sc.num_uavs * sc.horizon);
  const auto n_iut = static_cast<Index>(sc.num_devices) * n_ut;
  if (h.cols() != 2 * n_ut + n_iut) throw ArgumentError("output width does not match the scenario");

  auto position_head = [&](Index begin, double side) {
    const Var r = tape.relu(tape.select_cols(h, col_range(begin, begin + n_ut)));
    return (r / (r + 1.0)) * side;
  };
  PolicyNodes out;
  out.xs = position_head(0, sc.area_x);
  out.ys = position_head(n_ut, sc.area_y);
  out.p = tape.sigmoid(tape.select_cols(h, col_range(2 * n_ut, 2 * n_ut + n_iut)));
  return out;
}

WeightGradients weight_gradients(const Mlp& mlp, const LagrangianGraph& graph,
                                 std::span<const FadingDraw* const> draws, const Mat& features,
                                 const Multipliers& mu) {
  check_layers(mlp, graph.scenario());
  Tape tape;
  const auto params = bind_parameters(tape, mlp);
  const Var input = tape.constant(features);
  const PolicyNodes policy = forward_on_tape(tape, params, input, graph.scenario());
  const auto nodes = graph.build(tape, draws, policy.xs, policy.ys, policy.p, mu);
  tape.backward(nodes.loss);

  WeightGradients g;
  g.loss = nodes.loss.scalar();
  g.mean_aoi = nodes.aoi.value().mean();
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    g.d_weights.push_back(params[2 * l].grad());
    g.d_biases.push_back(params[2 * l + 1].grad());
  }
  for (std::size_t j = 0; j < kNumFamilies; ++j) {
    const Mat means = nodes.residuals[j].value().colwise().mean();
    g.residual_means[j].assign(means.data(), means.data() + means.size());
  }
  return g;
}

WeightGradients weight_gradients(const Mlp& mlp, const LagrangianGraph& graph,
                                 std::span<const FadingDraw* const> draws, const Multipliers& mu) {
  return weight_gradients(mlp, graph, draws, feature_matrix(graph.scenario(), draws), mu);
}

DecisionGradient grad_wrt_decision(const Scenario& sc, const FadingDraw& draw, const Decision& d,
                                   const Multipliers& mu, C1Form form) {
  d.check_shape(sc);
  const LagrangianGraph graph(sc, form);
  auto row = [](std::span<const double> v) {
    Mat m(1, static_cast<Index>(v.size()));
    std::copy(v.begin(), v.end(), m.data());
    return m;
  };
  Tape tape;
  const Var xs = tape.leaf(row(d.path.xs.flat()));
  const Var ys = tape.leaf(row(d.path.ys.flat()));
  const Var p = tape.leaf(row(d.probs.p.flat()));
  const FadingDraw* draws[] = {&draw};
  const auto nodes = graph.build(tape, draws, xs, ys, p, mu);
  tape.backward(nodes.loss);

  DecisionGradient g{nodes.loss.scalar(), Array2<double>(sc.num_uavs, sc.horizon),
                     Array2<double>(sc.num_uavs, sc.horizon),
                     Array3<double>(sc.num_devices, sc.num_uavs, sc.horizon)};
  std::copy_n(xs.grad().data(), g.d_xs.size(), g.d_xs.flat().begin());
  std::copy_n(ys.grad().data(), g.d_ys.size(), g.d_ys.flat().begin());
  std::copy_n(p.grad().data(), g.d_p.size(), g.d_p.flat().begin());
  return g;
}

void to_json(nlohmann::json& j, const Mlp& mlp) {
  j = nlohmann::json{{"layer_sizes", mlp.layer_sizes}, {"seed", mlp.seed}};
  auto& w = j["weights"] = nlohmann::json::array();
  auto& b = j["biases"] = nlohmann::json::array();
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    w.push_back(matrix_json(mlp.weights[l]));
    b.push_back(matrix_json(mlp.biases[l]));
  }
}

void from_json(const nlohmann::json& j, Mlp& mlp) {
  try {
    mlp = Mlp::zeros(j.at("layer_sizes").get<std::vector<std::size_t>>());
    mlp.seed = j.at("seed").get<std::uint64_t>();
    const auto& w = j.at("weights");
    const auto& b = j.at("biases");
    if (w.size() != mlp.weights.size() || b.size() != mlp.biases.size()) {
      throw ConfigError("checkpoint layer count mismatch");
    }
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
      mlp.weights[l] = matrix_from_json(w[l], mlp.weights[l].rows(), mlp.weights[l].cols());
      mlp.biases[l] = matrix_from_json(b[l], 1, mlp.biases[l].cols());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
  mlp.validate();
}

void save_checkpoint(const std::string& path, const Mlp& mlp, const std::string& config_hash) {
  nlohmann::json j = mlp;
  j["format"] = "aoiopt-mlp";
  j["version"] = 1;
  j["config_hash"] = config_hash;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump() << '\n';
}

Mlp load_checkpoint(const std::string& path, std::string* config_hash) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format").get<std::string>() != "aoiopt-mlp" || j.at("version").get<int>() != 1) {
      throw ConfigError("unsupported checkpoint format in " + path);
    }
    if (config_hash) *config_hash = j.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid checkpoint " + path + ": " + e.what());
  }
  return j.get<Mlp>();
}

}  // namespace aoiopt
