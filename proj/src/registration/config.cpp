#include "varireg/registration/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "varireg/common/error.hpp"

namespace varireg {

namespace pt = boost::property_tree;

namespace {

std::string decimal(double v) { return fmt::format("{}", v); }

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(Errc::parse, fmt::format("{}: '{}' is not a number", key, text));
  }
  if (used != text.size()) throw Error(Errc::parse, fmt::format("{}: '{}' is not a number", key, text));
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_double(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw Error(Errc::parse, fmt::format("{}: '{}' is not an integer", key, text));
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw Error(Errc::parse, fmt::format("{}: '{}' is not a boolean", key, text));
}

class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> get(const std::string& key) {
    seen_.insert(key);
    if (!tree_) return std::nullopt;
    if (auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'))) return *v;
    return std::nullopt;
  }
  void read(const std::string& key, double& out) {
    if (auto v = get(key)) out = to_double(qualified(key), *v);
  }
  void read(const std::string& key, int& out) {
    if (auto v = get(key)) out = to_int(qualified(key), *v);
  }
  void read(const std::string& key, bool& out) {
    if (auto v = get(key)) out = to_bool(qualified(key), *v);
  }
  KeyValues all() const {
    KeyValues kv;
    if (tree_)
      for (const auto& [k, v] : *tree_) kv[k] = v.data();
    return kv;
  }
  void mark_seen(const std::string& key) { seen_.insert(key); }
  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [k, v] : *tree_)
      if (!seen_.count(k)) throw Error(Errc::parse, fmt::format("unknown key '{}' in [{}]", k, name_));
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

 private:
  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> seen_;
};

}  // namespace

void RegistrationConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::invalid_argument, msg); };
  if (scales) scales->validate();
  if (auto_scales < 1) fail("auto_scales must be >= 1");
  if (!(adam.step_size > 0.0)) fail("step_size must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) fail("beta1 must be in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) fail("beta2 must be in [0, 1)");
  if (!(adam.epsilon > 0.0)) fail("adam epsilon must be positive");
  if (stop.max_iterations < 0) fail("max_iterations must be >= 0");
  if (stop.window < 1) fail("stop window must be >= 1");
  if (!(stop.relative_tolerance >= 0.0)) fail("stop tolerance must be >= 0");
  if (!(edge_weight >= 0.0) || !(laplacian_weight >= 0.0)) fail("regularizer weights must be >= 0");
  if (smoothing.enabled) {
    if (!(smoothing.lambda > 0.0)) fail("smoothing lambda must be positive");
    if (!(smoothing.mu < 0.0)) fail("smoothing mu must be negative");
    if (smoothing.iterations < 1) fail("smoothing iterations must be >= 1");
  }
  if (align_iterations < 1) fail("align_iterations must be >= 1");
  if (!(eval_kernel.sigma >= 0.0)) fail("evaluation sigma must be >= 0 (0 = auto)");
  if (!(eval_kernel.oriented_sharpness > 0.0)) fail("evaluation sharpness must be positive");
  if (!(sinkhorn_epsilon > 0.0)) fail("sinkhorn epsilon must be positive");
  if (reduction.tile_size < 1) fail("tile_size must be >= 1");
  if (mesh_format != "obj" && mesh_format != "ply" && mesh_format != "off") fail("mesh_format must be obj, ply or off");
}

RegistrationConfig parse_registration_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::parse, fmt::format("config line {}: {}", e.line(), e.message()));
  }
  static const std::set<std::string> known{"scales", "optimizer", "regularizers", "smoothing", "evaluation", "io"};
  for (const auto& [name, sub] : tree) {
    if (!known.count(name)) throw Error(Errc::parse, fmt::format("unknown section [{}]", name));
    if (sub.data().size() && sub.empty()) throw Error(Errc::parse, fmt::format("key '{}' outside a section", name));
  }
  auto section = [&](const std::string& name) {
    auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  RegistrationConfig cfg;

  Section scales = section("scales");
  const std::string mode = scales.get("mode").value_or("auto");
  if (mode == "auto") {
    scales.read("n_scales", cfg.auto_scales);
  } else if (mode == "explicit") {
    KeyValues kv = scales.all();
    kv.erase("mode");
    for (const auto& [k, v] : kv) scales.mark_seen(k);
    cfg.scales = multiscale_from_key_values(kv);
  } else {
    throw Error(Errc::parse, fmt::format("scales.mode: '{}' (expected auto or explicit)", mode));
  }
  scales.reject_unknown();

  Section opt = section("optimizer");
  opt.read("step_size", cfg.adam.step_size);
  opt.read("beta1", cfg.adam.beta1);
  opt.read("beta2", cfg.adam.beta2);
  opt.read("epsilon", cfg.adam.epsilon);
  opt.read("max_iterations", cfg.stop.max_iterations);
  opt.read("stop_window", cfg.stop.window);
  opt.read("stop_tolerance", cfg.stop.relative_tolerance);
  opt.read("prealign", cfg.prealign);
  opt.read("align_iterations", cfg.align_iterations);
  if (auto v = opt.get("seed")) {
    try {
      cfg.seed = std::stoull(*v);
    } catch (const std::exception&) {
      throw Error(Errc::parse, fmt::format("optimizer.seed: '{}' is not an unsigned integer", *v));
    }
  }
  opt.reject_unknown();

  Section reg = section("regularizers");
  reg.read("edge", cfg.edge_weight);
  reg.read("laplacian", cfg.laplacian_weight);
  reg.reject_unknown();

  Section sm = section("smoothing");
  sm.read("enabled", cfg.smoothing.enabled);
  sm.read("lambda", cfg.smoothing.lambda);
  sm.read("mu", cfg.smoothing.mu);
  sm.read("iterations", cfg.smoothing.iterations);
  sm.reject_unknown();

  Section ev = section("evaluation");
  if (auto v = ev.get("position")) cfg.eval_kernel.position = parse_position_kernel(*v);
  if (auto v = ev.get("normal")) cfg.eval_kernel.normal = parse_normal_kernel(*v);
  ev.read("sigma", cfg.eval_kernel.sigma);
  ev.read("sharpness", cfg.eval_kernel.oriented_sharpness);
  ev.read("sinkhorn", cfg.eval_sinkhorn);
  ev.read("sinkhorn_epsilon", cfg.sinkhorn_epsilon);
  ev.reject_unknown();

  Section io = section("io");
  if (auto v = io.get("mesh_format")) cfg.mesh_format = *v;
  if (auto v = io.get("reduction")) {
    if (*v == "deterministic") cfg.reduction.mode = ReductionMode::deterministic;
    else if (*v == "fast") cfg.reduction.mode = ReductionMode::fast;
    else throw Error(Errc::parse, fmt::format("io.reduction: '{}' (expected deterministic or fast)", *v));
  }
  int tile = static_cast<int>(cfg.reduction.tile_size);
  io.read("tile_size", tile);
  if (tile < 1) throw Error(Errc::parse, "io.tile_size must be >= 1");
  cfg.reduction.tile_size = static_cast<std::size_t>(tile);
  io.reject_unknown();

  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(Errc::parse, e.what());
  }
  return cfg;
}

RegistrationConfig load_registration_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path.string());
  return parse_registration_config(in);
}

std::string to_ini(const RegistrationConfig& cfg) {
  std::ostringstream out;
  out << "[scales]\n";
  if (cfg.scales) {
    out << "mode = explicit\n";
    for (const auto& [k, v] : to_key_values(*cfg.scales)) out << k << " = " << v << "\n";
  } else {
    out << "mode = auto\nn_scales = " << cfg.auto_scales << "\n";
  }
  out << "\n[optimizer]\n"
      << "step_size = " << decimal(cfg.adam.step_size) << "\n"
      << "beta1 = " << decimal(cfg.adam.beta1) << "\n"
      << "beta2 = " << decimal(cfg.adam.beta2) << "\n"
      << "epsilon = " << decimal(cfg.adam.epsilon) << "\n"
      << "max_iterations = " << cfg.stop.max_iterations << "\n"
      << "stop_window = " << cfg.stop.window << "\n"
      << "stop_tolerance = " << decimal(cfg.stop.relative_tolerance) << "\n"
      << "prealign = " << (cfg.prealign ? "true" : "false") << "\n"
      << "align_iterations = " << cfg.align_iterations << "\n"
      << "seed = " << cfg.seed << "\n";
  out << "\n[regularizers]\n"
      << "edge = " << decimal(cfg.edge_weight) << "\n"
      << "laplacian = " << decimal(cfg.laplacian_weight) << "\n";
  out << "\n[smoothing]\n"
      << "enabled = " << (cfg.smoothing.enabled ? "true" : "false") << "\n"
      << "lambda = " << decimal(cfg.smoothing.lambda) << "\n"
      << "mu = " << decimal(cfg.smoothing.mu) << "\n"
      << "iterations = " << cfg.smoothing.iterations << "\n";
  out << "\n[evaluation]\n"
      << "position = " << to_string(cfg.eval_kernel.position) << "\n"
      << "sigma = " << decimal(cfg.eval_kernel.sigma) << "\n"
      << "normal = " << to_string(cfg.eval_kernel.normal) << "\n"
      << "sharpness = " << decimal(cfg.eval_kernel.oriented_sharpness) << "\n"
      << "sinkhorn = " << (cfg.eval_sinkhorn ? "true" : "false") << "\n"
      << "sinkhorn_epsilon = " << decimal(cfg.sinkhorn_epsilon) << "\n";
  out << "\n[io]\n"
      << "mesh_format = " << cfg.mesh_format << "\n"
      << "reduction = " << (cfg.reduction.mode == ReductionMode::deterministic ? "deterministic" : "fast") << "\n"
      << "tile_size = " << cfg.reduction.tile_size << "\n";
  return out.str();
}

nlohmann::json to_json(const RegistrationConfig& cfg) {
  nlohmann::json j;
  if (cfg.scales) {
    j["scales"] = nlohmann::json(to_key_values(*cfg.scales));
  } else {
    j["scales"] = {{"mode", "auto"}, {"n_scales", cfg.auto_scales}};
  }
  j["optimizer"] = {{"step_size", cfg.adam.step_size},
                    {"beta1", cfg.adam.beta1},
                    {"beta2", cfg.adam.beta2},
                    {"epsilon", cfg.adam.epsilon},
                    {"max_iterations", cfg.stop.max_iterations},
                    {"stop_window", cfg.stop.window},
                    {"stop_tolerance", cfg.stop.relative_tolerance},
                    {"prealign", cfg.prealign},
                    {"align_iterations", cfg.align_iterations},
                    {"seed", cfg.seed}};
  j["regularizers"] = {{"edge", cfg.edge_weight}, {"laplacian", cfg.laplacian_weight}};
  j["smoothing"] = {{"enabled", cfg.smoothing.enabled},
                    {"lambda", cfg.smoothing.lambda},
                    {"mu", cfg.smoothing.mu},
                    {"iterations", cfg.smoothing.iterations}};
  j["evaluation"] = {{"position", to_string(cfg.eval_kernel.position)},
                     {"sigma", cfg.eval_kernel.sigma},
                     {"normal", to_string(cfg.eval_kernel.normal)},
                     {"sharpness", cfg.eval_kernel.oriented_sharpness},
                     {"sinkhorn", cfg.eval_sinkhorn},
                     {"sinkhorn_epsilon", cfg.sinkhorn_epsilon}};
  j["io"] = {{"mesh_format", cfg.mesh_format},
             {"reduction", cfg.reduction.mode == ReductionMode::deterministic ? "deterministic" : "fast"},
             {"tile_size", cfg.reduction.tile_size}};
  return j;
}

}  // namespace varireg
