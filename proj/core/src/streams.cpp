#include "lego/streams.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "lego/error.hpp"

namespace lego {

std::uint64_t StreamRng::below(std::uint64_t bound) noexcept {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::vector<double> zipf_probs(std::uint64_t n, double alpha) {
  if (n == 0) throw Error(Errc::invalid_configuration, "zipf needs n >= 1");
  if (!(alpha >= 0.0)) throw Error(Errc::invalid_configuration, "zipf needs alpha >= 0");
  std::vector<double> p(n);
  for (std::uint64_t i = 0; i < n; ++i) p[i] = std::pow(static_cast<double>(i + 1), -alpha);
  // Summing from the smallest terms keeps the normalizer accurate.
  const double total = std::accumulate(p.rbegin(), p.rend(), 0.0);
  for (double& x : p) x /= total;
  return p;
}

std::string rank_item(std::uint64_t rank) { return "item_" + std::to_string(rank); }

std::vector<std::string> gen_stream(const ZipfSpec& spec, SamplingMode mode) {
  const auto probs = zipf_probs(spec.n, spec.alpha);
  StreamRng rng(spec.seed);
  std::vector<std::string> out;
  out.reserve(spec.length);

  if (mode == SamplingMode::exact_quota) {
    std::vector<std::uint64_t> counts(spec.n);
    std::vector<std::pair<double, std::uint64_t>> remainders(spec.n);
    std::uint64_t assigned = 0;
    for (std::uint64_t i = 0; i < spec.n; ++i) {
      const double exact = probs[i] * static_cast<double>(spec.length);
      counts[i] = static_cast<std::uint64_t>(std::floor(exact));
      remainders[i] = {exact - static_cast<double>(counts[i]), i};
      assigned += counts[i];
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::uint64_t j = 0; assigned < spec.length; ++j, ++assigned) {
      ++counts[remainders[j % spec.n].second];
    }
    for (std::uint64_t i = 0; i < spec.n; ++i) {
      out.insert(out.end(), counts[i], rank_item(i + 1));
    }
  } else {
    std::vector<double> cdf(probs.size());
    std::partial_sum(probs.begin(), probs.end(), cdf.begin());
    for (std::uint64_t j = 0; j < spec.length; ++j) {
      const double u = rng.uniform() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const auto rank = std::min<std::uint64_t>(
          static_cast<std::uint64_t>(it - cdf.begin()), spec.n - 1);
      out.push_back(rank_item(rank + 1));
    }
  }
  rng.shuffle(out);
  return out;
}

void FrequencyTable::add(std::string_view item, std::uint64_t count) {
  if (count == 0) return;
  auto [it, inserted] = index_.try_emplace(std::string(item), entries_.size());
  if (inserted) {
    entries_.emplace_back(it->first, count);
  } else {
    entries_[it->second].second += count;
  }
  total_ += count;
}

std::uint64_t FrequencyTable::count(std::string_view item) const {
  auto it = index_.find(std::string(item));
  return it == index_.end() ? 0 : entries_[it->second].second;
}

bool FrequencyTable::contains(std::string_view item) const {
  return index_.find(std::string(item)) != index_.end();
}

void FrequencyTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot open " + path + " for writing");
  out << "item,count\n";
  for (const auto& [item, count] : entries_) out << csv_escape(item) << ',' << count << '\n';
  if (!out) throw Error(Errc::io_error, "failed writing " + path);
}

FrequencyTable FrequencyTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  FrequencyTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    auto fields = csv_split(line);
    if (fields.size() != 2) {
      throw Error(Errc::io_error, path + ":" + std::to_string(line_no) + ": expected item,count");
    }
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(Errc::io_error, path + ":" + std::to_string(line_no) + ": bad count");
    }
    table.add(fields[0], count);
  }
  return table;
}

FrequencyTable exact_count(std::span<const std::string> stream) {
  FrequencyTable table;
  for (const auto& item : stream) table.add(item);
  return table;
}

std::uint64_t min_stream_length(std::uint64_t n, double alpha) {
  const auto probs = zipf_probs(n, alpha);
  // n^alpha / C is 1 / p_n; the epsilon absorbs rounding so exact integers
  // (alpha = 0 gives n) are not pushed up by one.
  const double exact = 1.0 / probs.back();
  return static_cast<std::uint64_t>(std::ceil(exact * (1.0 - 1e-12)));
}

MetaTask gen_meta_task(const MetaTaskRanges& r, std::uint64_t seed) {
  if (r.n_range[0] == 0 || r.n_range[0] > r.n_range[1] || r.alpha_range[0] > r.alpha_range[1] ||
      r.length_multiplier_range[0] > r.length_multiplier_range[1] ||
      r.length_multiplier_range[0] <= 0.0) {
    throw Error(Errc::invalid_configuration, "meta-task ranges must be non-empty");
  }
  StreamRng rng(seed);
  MetaTask task;
  task.spec.n = rng.between(r.n_range[0], r.n_range[1]);
  task.spec.alpha = rng.uniform(r.alpha_range[0], r.alpha_range[1]);
  const double multiplier = rng.uniform(r.length_multiplier_range[0], r.length_multiplier_range[1]);
  const auto min_length = min_stream_length(task.spec.n, task.spec.alpha);
  task.spec.length = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(static_cast<double>(min_length) * multiplier)));
  task.spec.seed = rng.bits();
  task.support = gen_stream(task.spec);
  const auto table = exact_count(task.support);
  task.query = table.entries();
  return task;
}

bool is_valid_utf8(std::string_view s) noexcept {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += len;
  }
  return true;
}

std::vector<std::string> ingest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  std::vector<std::string> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!is_valid_utf8(line)) {
      throw Error(Errc::invalid_utf8, path + ": line " + std::to_string(line_no));
    }
    items.push_back(std::move(line));
  }
  if (in.bad()) throw Error(Errc::io_error, "error reading " + path);
  return items;
}

void write_stream(const std::string& path, std::span<const std::string> items) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open " + path + " for writing");
  for (const auto& item : items) out << item << '\n';
  if (!out) throw Error(Errc::io_error, "failed writing " + path);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (quoted) throw Error(Errc::io_error, "unterminated quoted CSV field");
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace lego
