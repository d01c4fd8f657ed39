#include "pnnchm/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#ifndef PNNCHM_DEFAULT_DATA_DIR
#define PNNCHM_DEFAULT_DATA_DIR "data"
#endif
#ifndef PNNCHM_DEFAULT_REGISTRY
#define PNNCHM_DEFAULT_REGISTRY "data/registry.json"
#endif

namespace pnnchm {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == delim && !quoted) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

bool is_missing(std::string_view tok) {
  const std::string t = lower(tok);
  return t.empty() || t == "?" || t == "na" || t == "nan";
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end && std::isfinite(out);
}

}  // namespace

std::vector<DatasetDescriptor> parse_registry(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("registry: ") + e.what());
  }
  if (!doc.contains("datasets") || !doc["datasets"].is_array()) {
    throw std::invalid_argument("registry: missing 'datasets' array");
  }
  std::vector<DatasetDescriptor> out;
  try {
    for (const auto& j : doc["datasets"]) {
      DatasetDescriptor d;
      d.name = j.at("name").get<std::string>();
      d.display_name = j.value("display_name", d.name);
      d.file = j.value("file", d.name + ".csv");
      d.urls = j.value("urls", std::vector<std::string>{});
      d.sha256 = j.value("sha256", std::string{});
      d.note = j.value("note", std::string{});
      d.label_column = j.value("label_column", std::string("class"));
      if (j.contains("raw")) {
        const auto& r = j["raw"];
        const std::string delim = r.value("delimiter", std::string(","));
        d.raw.whitespace = delim == "whitespace";
        if (!d.raw.whitespace) {
          if (delim.size() != 1) {
            throw std::invalid_argument("registry: delimiter must be one character");
          }
          d.raw.delimiter = delim[0];
        }
        d.raw.header = r.value("header", false);
        if (r.contains("label")) {
          if (r["label"].is_string()) d.raw.label = r["label"].get<std::string>();
          else d.raw.label = r["label"].get<int>();
        }
        d.raw.drop = r.value("drop", std::vector<int>{});
        d.raw.drop_incomplete = r.value("drop_incomplete", false);
        d.raw.min_class_size = r.value("min_class_size", std::size_t{0});
      }
      const auto& e = j.at("expected");
      d.expected.rows = e.at("rows").get<std::size_t>();
      d.expected.features = e.at("features").get<std::size_t>();
      d.expected.classes = e.at("classes").get<std::size_t>();
      d.expected.balance = e.value("balance", std::vector<std::size_t>{});
      out.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("registry: ") + e.what());
  }
  return out;
}

std::vector<DatasetDescriptor> load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open registry " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_registry(ss.str());
}

const DatasetDescriptor& find_descriptor(
    const std::vector<DatasetDescriptor>& registry, std::string_view name) {
  const std::string key = lower(name);
  for (const auto& d : registry) {
    if (lower(d.name) == key || lower(d.display_name) == key) return d;
  }
  throw std::invalid_argument("dataset not in registry: " + std::string(name));
}

Dataset parse_csv(std::istream& in, std::string_view label_column,
                  std::string_view source) {
  const std::string where(source);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_line(line, ',');
      break;
    }
  }
  if (header.empty()) throw std::runtime_error(where + ": empty file");

  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw std::runtime_error(where + ": no label column '" +
                             std::string(label_column) + "'");
  }
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_idx) feature_names.push_back(header[c]);
  }
  const std::size_t n = feature_names.size();

  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;
  std::map<std::string, std::size_t> class_ids;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_line(line, ',');
    if (fields.size() != header.size()) {
      throw std::runtime_error(where + ": row " + std::to_string(row) + " (line " +
                               std::to_string(line_no) + ") has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (is_missing(fields[c])) {
        throw std::runtime_error(where + ": row " + std::to_string(row) +
                                 " has a missing value in column '" + header[c] + "'");
      }
      if (c == label_idx) continue;
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw std::runtime_error(where + ": row " + std::to_string(row) +
                                 " column '" + header[c] + "' is not numeric: '" +
                                 fields[c] + "'");
      }
      values.push_back(v);
    }
    const std::string& lab = fields[label_idx];
    auto [it, inserted] = class_ids.try_emplace(lab, class_names.size());
    if (inserted) class_names.push_back(lab);
    labels.push_back(it->second);
    ++row;
  }
  if (row == 0) throw std::runtime_error(where + ": no data rows");

  FeatureMatrix features(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(n));
  std::copy(values.begin(), values.end(), features.data());
  const std::size_t g = class_names.size();
  return make_dataset(std::move(features), std::move(labels), g,
                      std::move(feature_names), std::move(class_names));
}

Dataset load_csv(const std::filesystem::path& path, std::string_view label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_csv(in, label_column, path.string());
}

Dataset load_csv(const std::filesystem::path& path,
                 const DatasetDescriptor& descriptor) {
  return load_csv(path, descriptor.label_column);
}

void write_csv(std::ostream& out, const Dataset& ds, std::string_view label_column) {
  for (std::size_t d = 0; d < ds.num_features(); ++d) {
    out << (d < ds.feature_names.size() ? ds.feature_names[d]
                                        : "f" + std::to_string(d + 1))
        << ',';
  }
  out << label_column << '\n';
  char buf[64];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out.write(buf, res.ptr - buf) << ',';
    }
    const std::size_t lab = ds.labels[i];
    out << (lab < ds.class_names.size() ? ds.class_names[lab] : std::to_string(lab))
        << '\n';
  }
}

std::vector<std::string> validation_warnings(const Dataset& ds,
                                             const DatasetDescriptor& descriptor) {
  std::vector<std::string> w;
  const auto& e = descriptor.expected;
  const std::string who = descriptor.display_name + ": ";
  if (ds.size() != e.rows) {
    w.push_back(who + "expected " + std::to_string(e.rows) + " rows, found " +
                std::to_string(ds.size()));
  }
  if (ds.num_features() != e.features) {
    w.push_back(who + "expected " + std::to_string(e.features) +
                " features, found " + std::to_string(ds.num_features()));
  }
  if (ds.num_classes() != e.classes) {
    w.push_back(who + "expected " + std::to_string(e.classes) +
                " classes, found " + std::to_string(ds.num_classes()));
  }
  // a partial balance list cannot be compared class by class
  if (!e.balance.empty() && e.balance.size() == e.classes &&
      ds.num_classes() == e.classes) {
    std::vector<std::size_t> counts = ds.class_counts;
    std::sort(counts.begin(), counts.end(), std::greater<>());
    if (counts != e.balance) {
      std::string found;
      for (std::size_t c : counts) found += (found.empty() ? "" : "/") + std::to_string(c);
      w.push_back(who + "class balance differs from expectation, found " + found);
    }
  }
  return w;
}

std::vector<std::size_t> stratified_test_counts(
    std::span<const std::size_t> class_counts, double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  std::size_t total = 0;
  for (std::size_t j = 0; j < class_counts.size(); ++j) {
    if (class_counts[j] < 2) {
      throw std::invalid_argument("class " + std::to_string(j) +
                                  " has fewer than 2 samples");
    }
    total += class_counts[j];
  }
  const auto target =
      static_cast<std::size_t>(std::llround(static_cast<double>(total) * test_fraction));

  std::vector<std::size_t> counts(class_counts.size());
  std::vector<double> remainder(class_counts.size());
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < class_counts.size(); ++j) {
    const double quota = static_cast<double>(class_counts[j]) * test_fraction;
    counts[j] = std::min(static_cast<std::size_t>(std::floor(quota)), class_counts[j] - 1);
    remainder[j] = quota - static_cast<double>(counts[j]);
    assigned += counts[j];
  }
  std::vector<std::size_t> order(class_counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    const std::size_t j = order[k];
    if (counts[j] + 1 < class_counts[j]) {
      ++counts[j];
      ++assigned;
    }
  }
  return counts;
}

SplitIndices stratified_split_indices(const Dataset& ds, const SplitSpec& spec) {
  const auto counts = stratified_test_counts(ds.class_counts, spec.test_fraction);
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes());
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

  std::mt19937_64 rng(spec.seed);
  SplitIndices out;
  for (std::size_t j = 0; j < by_class.size(); ++j) {
    auto& idx = by_class[j];
    // Fisher-Yates with an explicit draw keeps the partition portable
    for (std::size_t k = idx.size(); k > 1; --k) {
      const std::size_t r = static_cast<std::size_t>(rng() % k);
      std::swap(idx[k - 1], idx[r]);
    }
    out.test.insert(out.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(counts[j]));
    out.train.insert(out.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(counts[j]), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Split stratified_split(const Dataset& ds, const SplitSpec& spec) {
  Split s;
  s.indices = stratified_split_indices(ds, spec);
  s.train = subset(ds, s.indices.train);
  s.test = subset(ds, s.indices.test);
  return s;
}

std::filesystem::path data_directory() {
  if (const char* env = std::getenv("PNN_CHM_DATA"); env && *env) return env;
  return PNNCHM_DEFAULT_DATA_DIR;
}

std::filesystem::path default_registry_path() {
  const auto local = data_directory() / "registry.json";
  if (std::filesystem::exists(local)) return local;
  return PNNCHM_DEFAULT_REGISTRY;
}

}  // namespace pnnchm
