#include "aoiopt/scenario.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "aoiopt/errors.hpp"

namespace aoiopt {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

// Uniform on [lo, hi], with lo == hi allowed.
double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Uniform on [lo, hi] excluding zero; used for strictly positive radio quantities.
double uniform_positive(Rng& rng, double lo, double hi) {
  double v = uniform(rng, lo, hi);
  while (v <= 0.0) v = uniform(rng, lo, hi);
  return v;
}

template <class T>
nlohmann::json shaped(std::vector<std::size_t> shape, const std::vector<T>& data) {
  return {{"shape", std::move(shape)}, {"data", data}};
}

std::vector<double> read_shaped(const nlohmann::json& j, const std::vector<std::size_t>& shape,
                                const char* name) {
  const auto got = j.at("shape").get<std::vector<std::size_t>>();
  if (got != shape) throw ConfigError(std::string("shape mismatch for field ") + name);
  auto data = j.at("data").get<std::vector<double>>();
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  if (data.size() != n) throw ConfigError(std::string("data length mismatch for field ") + name);
  return data;
}

}  // namespace

GenConfig GenConfig::desk() {
  GenConfig c;
  c.num_devices = 6;
  c.num_uavs = 2;
  c.horizon = 10;
  return c;
}

void GenConfig::validate() const {
  require(num_devices >= 1, "num_devices must be >= 1");
  require(num_uavs >= 1, "num_uavs must be >= 1");
  require(horizon >= 2, "horizon must be >= 2");
  require(finite_positive(area_x) && finite_positive(area_y), "area must be positive");
  require(std::isfinite(alt_min) && alt_min > 0.0 && alt_min <= alt_max && std::isfinite(alt_max),
          "altitude range must satisfy 0 < alt_min <= alt_max");
  require(power_min_w >= 0.0 && power_min_w <= power_max_w && finite_positive(power_max_w),
          "power range must satisfy 0 <= min <= max, max > 0");
  require(finite_positive(bandwidth_min_hz) && bandwidth_min_hz <= bandwidth_max_hz &&
              std::isfinite(bandwidth_max_hz),
          "bandwidth range must satisfy 0 < min <= max");
  require(std::isfinite(noise_dbm), "noise_dbm must be finite");
  require(std::isfinite(rician_k) && rician_k >= 0.0, "rician_k must be >= 0");
  require(std::isfinite(rate_min_bps) && rate_min_bps >= 0.0, "rate_min must be >= 0");
  require(uav_cap >= 1, "uav_cap must be >= 1");
  require(finite_positive(speed), "speed must be positive");
  require(finite_positive(interval_len), "interval_len must be positive");
  if (flight_budget) require(finite_positive(*flight_budget), "flight_budget must be positive");
}

void Scenario::validate() const {
  require(num_devices >= 1 && num_uavs >= 1, "scenario needs at least one device and one UAV");
  require(horizon >= 2, "horizon must be >= 2");
  require(finite_positive(area_x) && finite_positive(area_y), "area must be positive");
  require(device_pos.size() == num_devices, "device_pos size mismatch");
  require(uav_alt.size() == num_uavs, "uav_alt size mismatch");
  require(tx_power.size() == num_devices, "tx_power size mismatch");
  require(bandwidth.dim(0) == num_devices && bandwidth.dim(1) == num_uavs,
          "bandwidth shape mismatch");
  for (const auto& p : device_pos) {
    require(std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.y >= 0.0 &&
                p.x <= area_x && p.y <= area_y,
            "device position outside area");
  }
  for (double h : uav_alt) require(std::isfinite(h) && h >= 0.0, "altitude must be finite, >= 0");
  for (double p : tx_power) require(finite_positive(p), "tx_power must be positive");
  for (double b : bandwidth.flat()) require(finite_positive(b), "bandwidth must be positive");
  require(finite_positive(noise_var), "noise_var must be positive");
  require(std::isfinite(rician_k) && rician_k >= 0.0, "rician_k must be >= 0");
  require(std::isfinite(rate_min) && rate_min >= 0.0, "rate_min must be >= 0");
  require(uav_cap >= 1, "uav_cap must be >= 1");
  require(finite_positive(speed), "speed must be positive");
  require(finite_positive(interval_len), "interval_len must be positive");
  require(finite_positive(flight_budget), "flight_budget must be positive");
}

void Dataset::validate() const {
  scenario.validate();
  require(!draws.empty(), "dataset has no draws");
  const std::array<std::size_t, 3> shape{scenario.num_devices, scenario.num_uavs,
                                         scenario.horizon};
  for (const auto& d : draws) {
    require(d.gain_sq.dims() == shape, "fading draw shape mismatch");
    for (double g : d.gain_sq.flat()) require(std::isfinite(g) && g >= 0.0, "bad gain value");
  }
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

Scenario generate_scenario(const GenConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Scenario sc;
  sc.num_devices = config.num_devices;
  sc.num_uavs = config.num_uavs;
  sc.horizon = config.horizon;
  sc.area_x = config.area_x;
  sc.area_y = config.area_y;

  sc.device_pos.resize(sc.num_devices);
  for (auto& p : sc.device_pos) {
    p.x = uniform(rng, 0.0, config.area_x);
    p.y = uniform(rng, 0.0, config.area_y);
  }
  sc.uav_alt.resize(sc.num_uavs);
  for (auto& h : sc.uav_alt) h = uniform(rng, config.alt_min, config.alt_max);
  sc.tx_power.resize(sc.num_devices);
  for (auto& p : sc.tx_power) p = uniform_positive(rng, config.power_min_w, config.power_max_w);
  sc.bandwidth = Array2<double>(sc.num_devices, sc.num_uavs);
  for (auto& b : sc.bandwidth.flat()) {
    b = uniform_positive(rng, config.bandwidth_min_hz, config.bandwidth_max_hz);
  }

  sc.noise_var = dbm_to_watts(config.noise_dbm);
  sc.rician_k = config.rician_k;
  sc.rate_min = config.rate_min_bps;
  sc.uav_cap = config.uav_cap;
  sc.speed = config.speed;
  sc.interval_len = config.interval_len;
  sc.flight_budget =
      config.flight_budget.value_or(static_cast<double>(config.horizon) * config.interval_len);
  sc.validate();
  return sc;
}

FadingDraw sample_fading(const Scenario& sc, Rng& rng) {
  const double k = sc.rician_k;
  const double los_amp = std::sqrt(k / (k + 1.0));
  const double nlos_amp = std::sqrt(1.0 / (k + 1.0));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  // Real and imaginary parts each carry half of the unit scatter power.
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

  FadingDraw draw{Array3<double>(sc.num_devices, sc.num_uavs, sc.horizon)};
  for (double& g : draw.gain_sq.flat()) {
    const double phi = phase(rng);
    const double zr = gauss(rng);
    const double zi = gauss(rng);
    const std::complex<double> h = los_amp * std::polar(1.0, phi) + nlos_amp * std::complex(zr, zi);
    g = std::norm(h);
  }
  return draw;
}

Dataset make_dataset(const Scenario& sc, std::size_t n_draws, std::uint64_t seed) {
  sc.validate();
  if (n_draws == 0) throw ArgumentError("dataset needs at least one draw");
  Rng rng(seed);
  Dataset ds{sc, {}, seed};
  ds.draws.reserve(n_draws);
  for (std::size_t n = 0; n < n_draws; ++n) ds.draws.push_back(sample_fading(sc, rng));
  return ds;
}

std::vector<Dataset> split_dataset(const Dataset& ds, std::size_t n_parts) {
  if (n_parts == 0) throw ArgumentError("n_parts must be >= 1");
  if (n_parts > ds.draws.size()) {
    throw ArgumentError("cannot split " + std::to_string(ds.draws.size()) + " draws into " +
                        std::to_string(n_parts) + " parts");
  }
  const std::size_t base = ds.draws.size() / n_parts;
  const std::size_t extra = ds.draws.size() % n_parts;
  std::vector<Dataset> parts;
  parts.reserve(n_parts);
  std::size_t begin = 0;
  for (std::size_t k = 0; k < n_parts; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    Dataset part{ds.scenario, {}, ds.seed};
    part.draws.assign(ds.draws.begin() + static_cast<std::ptrdiff_t>(begin),
                      ds.draws.begin() + static_cast<std::ptrdiff_t>(begin + len));
    parts.push_back(std::move(part));
    begin += len;
  }
  return parts;
}

void to_json(nlohmann::json& j, const GenConfig& c) {
  j = nlohmann::json{{"num_devices", c.num_devices},
                     {"num_uavs", c.num_uavs},
                     {"horizon", c.horizon},
                     {"area_x", c.area_x},
                     {"area_y", c.area_y},
                     {"alt_min", c.alt_min},
                     {"alt_max", c.alt_max},
                     {"power_min_w", c.power_min_w},
                     {"power_max_w", c.power_max_w},
                     {"bandwidth_min_hz", c.bandwidth_min_hz},
                     {"bandwidth_max_hz", c.bandwidth_max_hz},
                     {"noise_dbm", c.noise_dbm},
                     {"rician_k", c.rician_k},
                     {"rate_min_bps", c.rate_min_bps},
                     {"uav_cap", c.uav_cap},
                     {"speed", c.speed},
                     {"interval_len", c.interval_len}};
  if (c.flight_budget) j["flight_budget"] = *c.flight_budget;
}

void from_json(const nlohmann::json& j, GenConfig& c) {
  try {
    c.num_devices = j.value("num_devices", c.num_devices);
    c.num_uavs = j.value("num_uavs", c.num_uavs);
    c.horizon = j.value("horizon", c.horizon);
    c.area_x = j.value("area_x", c.area_x);
    c.area_y = j.value("area_y", c.area_y);
    c.alt_min = j.value("alt_min", c.alt_min);
    c.alt_max = j.value("alt_max", c.alt_max);
    c.power_min_w = j.value("power_min_w", c.power_min_w);
    c.power_max_w = j.value("power_max_w", c.power_max_w);
    c.bandwidth_min_hz = j.value("bandwidth_min_hz", c.bandwidth_min_hz);
    c.bandwidth_max_hz = j.value("bandwidth_max_hz", c.bandwidth_max_hz);
    c.noise_dbm = j.value("noise_dbm", c.noise_dbm);
    c.rician_k = j.value("rician_k", c.rician_k);
    c.rate_min_bps = j.value("rate_min_bps", c.rate_min_bps);
    c.uav_cap = j.value("uav_cap", c.uav_cap);
    c.speed = j.value("speed", c.speed);
    c.interval_len = j.value("interval_len", c.interval_len);
    if (j.contains("flight_budget")) c.flight_budget = j.at("flight_budget").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed generator config: ") + e.what());
  }
  c.validate();
}

void to_json(nlohmann::json& j, const Scenario& sc) {
  std::vector<double> pos;
  pos.reserve(2 * sc.device_pos.size());
  for (const auto& p : sc.device_pos) {
    pos.push_back(p.x);
    pos.push_back(p.y);
  }
  j = nlohmann::json{
      {"num_devices", sc.num_devices},
      {"num_uavs", sc.num_uavs},
      {"horizon", sc.horizon},
      {"area_x", sc.area_x},
      {"area_y", sc.area_y},
      {"device_pos", shaped({sc.num_devices, 2}, pos)},
      {"uav_alt", shaped({sc.num_uavs}, sc.uav_alt)},
      {"tx_power", shaped({sc.num_devices}, sc.tx_power)},
      {"bandwidth", shaped({sc.num_devices, sc.num_uavs}, sc.bandwidth.storage())},
      {"noise_var", sc.noise_var},
      {"rician_k", sc.rician_k},
      {"rate_min", sc.rate_min},
      {"uav_cap", sc.uav_cap},
      {"speed", sc.speed},
      {"interval_len", sc.interval_len},
      {"flight_budget", sc.flight_budget},
  };
}

void from_json(const nlohmann::json& j, Scenario& sc) {
  try {
    sc.num_devices = j.at("num_devices").get<std::size_t>();
    sc.num_uavs = j.at("num_uavs").get<std::size_t>();
    sc.horizon = j.at("horizon").get<std::size_t>();
    sc.area_x = j.at("area_x").get<double>();
    sc.area_y = j.at("area_y").get<double>();
    const auto pos = read_shaped(j.at("device_pos"), {sc.num_devices, 2}, "device_pos");
    sc.device_pos.resize(sc.num_devices);
    for (std::size_t i = 0; i < sc.num_devices; ++i) sc.device_pos[i] = {pos[2 * i], pos[2 * i + 1]};
    sc.uav_alt = read_shaped(j.at("uav_alt"), {sc.num_uavs}, "uav_alt");
    sc.tx_power = read_shaped(j.at("tx_power"), {sc.num_devices}, "tx_power");
    sc.bandwidth = Array2<double>(sc.num_devices, sc.num_uavs);
    sc.bandwidth.storage() =
        read_shaped(j.at("bandwidth"), {sc.num_devices, sc.num_uavs}, "bandwidth");
    sc.noise_var = j.at("noise_var").get<double>();
    sc.rician_k = j.at("rician_k").get<double>();
    sc.rate_min = j.at("rate_min").get<double>();
    sc.uav_cap = j.at("uav_cap").get<std::size_t>();
    sc.speed = j.at("speed").get<double>();
    sc.interval_len = j.at("interval_len").get<double>();
    sc.flight_budget = j.at("flight_budget").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  sc.validate();
}

void to_json(nlohmann::json& j, const Dataset& ds) {
  std::vector<double> gains;
  gains.reserve(ds.draws.size() * (ds.draws.empty() ? 0 : ds.draws.front().gain_sq.size()));
  for (const auto& d : ds.draws) gains.insert(gains.end(), d.gain_sq.flat().begin(), d.gain_sq.flat().end());
  const auto& sc = ds.scenario;
  j = nlohmann::json{
      {"format", "aoiopt-dataset"},
      {"version", 1},
      {"seed", ds.seed},
      {"scenario", ds.scenario},
      {"draws", shaped({ds.draws.size(), sc.num_devices, sc.num_uavs, sc.horizon}, gains)},
  };
}

void from_json(const nlohmann::json& j, Dataset& ds) {
  try {
    if (j.at("format").get<std::string>() != "aoiopt-dataset") throw ConfigError("not a dataset file");
    if (j.at("version").get<int>() != 1) throw ConfigError("unsupported dataset version");
    ds.seed = j.at("seed").get<std::uint64_t>();
    ds.scenario = j.at("scenario").get<Scenario>();
    const auto& sc = ds.scenario;
    const auto n = j.at("draws").at("shape").at(0).get<std::size_t>();
    const auto gains =
        read_shaped(j.at("draws"), {n, sc.num_devices, sc.num_uavs, sc.horizon}, "draws");
    const std::size_t per = sc.num_devices * sc.num_uavs * sc.horizon;
    ds.draws.assign(n, FadingDraw{Array3<double>(sc.num_devices, sc.num_uavs, sc.horizon)});
    for (std::size_t k = 0; k < n; ++k) {
      std::copy_n(gains.begin() + static_cast<std::ptrdiff_t>(k * per), per,
                  ds.draws[k].gain_sq.storage().begin());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed dataset: ") + e.what());
  }
  ds.validate();
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << nlohmann::json(ds).dump() << '\n';
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return j.get<Dataset>();
}

}  // namespace aoiopt
