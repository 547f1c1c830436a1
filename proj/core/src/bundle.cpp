#include "lego/bundle.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lego/error.hpp"

namespace lego {
namespace {

using nlohmann::json;

[[noreturn]] void reject(const std::string& what) { throw Error(Errc::malformed_bundle, what); }

void check_chain(const nn::LayerStack& stack, const char* name) {
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const auto& layer = stack[i];
    std::ostringstream where;
    where << name << "[" << i << "]";
    if (layer.in_dim == 0 || layer.out_dim == 0) reject(where.str() + " has a zero dimension");
    if (layer.weights.size() != layer.in_dim * layer.out_dim) {
      reject(where.str() + " weights length != in_dim*out_dim");
    }
    if (layer.bias.size() != layer.out_dim) reject(where.str() + " bias length != out_dim");
    if (i > 0 && stack[i - 1].out_dim != layer.in_dim) {
      reject(where.str() + " input dim does not match previous layer output");
    }
    for (double w : layer.weights)
      if (!std::isfinite(w)) reject(where.str() + " has a non-finite weight");
    for (double b : layer.bias)
      if (!std::isfinite(b)) reject(where.str() + " has a non-finite bias");
  }
}

void check_hidden_widths(const nn::LayerStack& stack, const char* name, bool last_is_output) {
  const std::size_t hidden = last_is_output ? stack.size() - 1 : stack.size();
  for (std::size_t i = 0; i < hidden; ++i) {
    if (stack[i].out_dim > WeightBundle::kMaxHiddenWidth) {
      std::ostringstream msg;
      msg << name << "[" << i << "] hidden width " << stack[i].out_dim << " exceeds "
          << WeightBundle::kMaxHiddenWidth;
      reject(msg.str());
    }
  }
}

json layers_to_json(const nn::LayerStack& stack) {
  json out = json::array();
  for (const auto& layer : stack) {
    out.push_back({{"in_dim", layer.in_dim},
                   {"out_dim", layer.out_dim},
                   {"weights", layer.weights},
                   {"bias", layer.bias},
                   {"activation", nn::to_string(layer.activation)}});
  }
  return out;
}

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) reject(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get(const json& obj, const char* key) {
  const json& value = field(obj, key);
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    reject(std::string("field '") + key + "' has the wrong type");
  }
}

nn::LayerStack layers_from_json(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) reject(std::string("field '") + key + "' must be an array");
  nn::LayerStack stack;
  for (const auto& item : *it) {
    nn::DenseLayer layer;
    layer.in_dim = get<std::size_t>(item, "in_dim");
    layer.out_dim = get<std::size_t>(item, "out_dim");
    layer.weights = get<std::vector<double>>(item, "weights");
    layer.bias = get<std::vector<double>>(item, "bias");
    layer.activation = nn::activation_from_string(get<std::string>(item, "activation"));
    stack.push_back(std::move(layer));
  }
  return stack;
}

std::vector<HashSeed> seeds_from(const std::vector<std::uint64_t>& raw) {
  std::vector<HashSeed> out;
  out.reserve(raw.size());
  for (auto v : raw) out.push_back(HashSeed{v});
  return out;
}

std::vector<std::uint64_t> raw_seeds(const std::vector<HashSeed>& seeds) {
  std::vector<std::uint64_t> out;
  out.reserve(seeds.size());
  for (auto s : seeds) out.push_back(s.value);
  return out;
}

}  // namespace

WeightBundle WeightBundle::untrained(std::uint64_t master_seed, std::size_t d1, std::size_t d2) {
  WeightBundle b;
  b.d1 = d1;
  b.d2 = d2;
  b.scan_subset_columns = default_scan_columns(d2);
  SeedSequence seq(master_seed);
  b.seeds.embed = seq.take(d1);
  b.seeds.address = seq.take(d1);
  b.seeds.brick = seq.next();
  b.embedding_values = EmbeddingTable::linear_spread(b.v_dim, b.seeds.embed).values();
  return b;
}

void WeightBundle::validate() const {
  if (format_version != kFormatVersion) {
    reject("unsupported format_version " + std::to_string(format_version));
  }
  if (d1 == 0 || d1 > kMaxRows) reject("d1 must lie in [1, " + std::to_string(kMaxRows) + "]");
  if (d2 == 0) reject("d2 must be positive");
  if (v_dim == 0) reject("v_dim must be positive");
  if (!(clamp_epsilon > 0.0 && clamp_epsilon <= 1.0)) reject("clamp_epsilon must lie in (0, 1]");
  if (embedding_values.size() != v_dim) reject("embedding_values length != v_dim");
  for (std::size_t i = 0; i < embedding_values.size(); ++i) {
    const double v = embedding_values[i];
    if (!(v >= clamp_epsilon && v <= 1.0)) {
      std::ostringstream msg;
      msg << "embedding_values[" << i << "] = " << v << " outside [clamp_epsilon, 1]";
      reject(msg.str());
    }
  }
  if (seeds.embed.size() != d1) reject("seeds.embed length != d1");
  if (seeds.address.size() != d1) reject("seeds.address length != d1");
  if (!std::isfinite(beta)) reject("beta must be finite");
  if (!(alpha_interval[0] <= alpha_interval[1])) reject("alpha_interval must be [low, high]");
  if (scan_subset_columns == 0 || scan_subset_columns > d2) {
    reject("scan_subset_columns must lie in [1, d2]");
  }
  if (!std::isfinite(leaky_slope)) reject("leaky_slope must be finite");
  if (s_dim < 2) reject("s_dim must be at least 2");

  if (!has_networks()) return;
  if (scan_phi.empty() || scan_rho.empty() || dec.empty()) {
    reject("scan_phi, scan_rho and dec must be all present or all absent");
  }
  check_chain(scan_phi, "scan_phi");
  check_chain(scan_rho, "scan_rho");
  check_chain(dec, "dec");
  if (scan_phi.front().in_dim != d1) reject("scan_phi input dim != d1");
  if (scan_rho.front().in_dim != scan_phi.back().out_dim + 1) {
    reject("scan_rho input dim != scan_phi output dim + 1");
  }
  if (scan_rho.back().out_dim != s_dim) reject("scan_rho output dim != s_dim");
  if (dec.front().in_dim != 2 * d1 + 1 + s_dim) reject("dec input dim != 2*d1 + 1 + s_dim");
  if (dec.back().out_dim != 1) reject("dec output dim != 1");
  if (scan_phi.size() + scan_rho.size() != kNetworkDepth) {
    reject("scan_phi + scan_rho must have 8 layers in total");
  }
  if (dec.size() != kNetworkDepth) reject("dec must have 8 layers");
  check_hidden_widths(scan_phi, "scan_phi", false);
  check_hidden_widths(scan_rho, "scan_rho", true);
  check_hidden_widths(dec, "dec", true);
}

EmbeddingTable WeightBundle::make_table() const {
  EmbeddingTable table(embedding_values, seeds.embed, clamp_epsilon);
  table.set_normalize(!flags.no_normalization);
  return table;
}

std::uint64_t WeightBundle::layout_fingerprint() const {
  std::string bytes;
  auto put = [&bytes](std::uint64_t v) { bytes += encode_int_item(v); };
  put(d1);
  put(d2);
  put(v_dim);
  put(flags.no_normalization ? 1 : 0);
  for (auto s : seeds.embed) put(s.value);
  for (auto s : seeds.address) put(s.value);
  put(seeds.brick.value);
  for (double v : embedding_values) put(std::bit_cast<std::uint64_t>(v));
  return base_hash(bytes);
}

std::string bundle_to_json(const WeightBundle& b) {
  json j;
  j["format_version"] = b.format_version;
  j["d1"] = b.d1;
  j["d2"] = b.d2;
  j["v_dim"] = b.v_dim;
  j["clamp_epsilon"] = b.clamp_epsilon;
  j["s_dim"] = b.s_dim;
  j["beta"] = b.beta;
  j["alpha_interval"] = b.alpha_interval;
  j["scan_subset_columns"] = b.scan_subset_columns;
  j["leaky_slope"] = b.leaky_slope;
  j["embedding_values"] = b.embedding_values;
  j["seeds"] = {{"embed", raw_seeds(b.seeds.embed)},
                {"address", raw_seeds(b.seeds.address)},
                {"brick", b.seeds.brick.value}};
  j["scan_phi"] = layers_to_json(b.scan_phi);
  j["scan_rho"] = layers_to_json(b.scan_rho);
  j["dec"] = layers_to_json(b.dec);
  j["flags"] = {{"no_scanner", b.flags.no_scanner},
                {"no_normalization", b.flags.no_normalization}};
  return j.dump(1);
}

WeightBundle bundle_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    reject(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) reject("top level must be a JSON object");

  WeightBundle b;
  b.format_version = get<int>(j, "format_version");
  if (b.format_version != WeightBundle::kFormatVersion) {
    reject("unsupported format_version " + std::to_string(b.format_version));
  }
  b.d1 = get<std::size_t>(j, "d1");
  b.d2 = get<std::size_t>(j, "d2");
  b.v_dim = get<std::size_t>(j, "v_dim");
  b.clamp_epsilon = get<double>(j, "clamp_epsilon");
  b.s_dim = get<std::size_t>(j, "s_dim");
  b.beta = get<double>(j, "beta");
  b.alpha_interval = get<std::array<double, 2>>(j, "alpha_interval");
  b.scan_subset_columns = get<std::size_t>(j, "scan_subset_columns");
  b.leaky_slope = get<double>(j, "leaky_slope");
  b.embedding_values = get<std::vector<double>>(j, "embedding_values");
  const json& seeds = field(j, "seeds");
  b.seeds.embed = seeds_from(get<std::vector<std::uint64_t>>(seeds, "embed"));
  b.seeds.address = seeds_from(get<std::vector<std::uint64_t>>(seeds, "address"));
  b.seeds.brick = HashSeed{get<std::uint64_t>(seeds, "brick")};
  b.scan_phi = layers_from_json(j, "scan_phi");
  b.scan_rho = layers_from_json(j, "scan_rho");
  b.dec = layers_from_json(j, "dec");
  if (auto it = j.find("flags"); it != j.end()) {
    b.flags.no_scanner = it->value("no_scanner", false);
    b.flags.no_normalization = it->value("no_normalization", false);
  }
  b.validate();
  return b;
}

void save_bundle(const WeightBundle& bundle, const std::string& path) {
  bundle.validate();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(Errc::io_error, "cannot open " + tmp + " for writing");
    out << bundle_to_json(bundle) << '\n';
    if (!out) throw Error(Errc::io_error, "failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io_error, "cannot rename " + tmp + " to " + path);
}

WeightBundle load_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open bundle " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return bundle_from_json(buf.str());
}

}  // namespace lego
