#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pnnchm/dataset.hpp"

namespace pnnchm {

/// How a source file is laid out before conversion to the canonical CSV.
struct RawFormat {
  bool whitespace = false;  // split on runs of blanks instead of `delimiter`
  char delimiter = ',';
  bool header = false;
  /// Column index (negative counts from the end) or header name.
  std::variant<int, std::string> label = -1;
  std::vector<int> drop;  // column indices, negative counts from the end
  bool drop_incomplete = false;
  std::size_t min_class_size = 0;  // rows of smaller classes are dropped
};

struct Expectation {
  std::size_t rows = 0;
  std::size_t features = 0;
  std::size_t classes = 0;
  /// Class sizes in descending order; may list fewer than `classes`.
  std::vector<std::size_t> balance;
};

struct DatasetDescriptor {
  std::string name;
  std::string display_name;
  std::string file;  // canonical CSV name inside the cache directory
  std::vector<std::string> urls;
  std::string sha256;  // of the concatenated raw download, optional
  std::string note;
  std::string label_column = "class";
  RawFormat raw;
  Expectation expected;
};

/// Parses the registry JSON; throws std::invalid_argument on bad content.
std::vector<DatasetDescriptor> parse_registry(std::string_view json_text);
std::vector<DatasetDescriptor> load_registry(const std::filesystem::path& path);

/// Looks up by name or display name, ignoring case.
const DatasetDescriptor& find_descriptor(
    const std::vector<DatasetDescriptor>& registry, std::string_view name);

/// Canonical CSV: header row, comma separated, label column named by
/// `label_column`, every other column numeric. Labels map to 0..G-1 in order
/// of first appearance. Throws std::runtime_error naming the offending row.
Dataset parse_csv(std::istream& in, std::string_view label_column = "class",
                  std::string_view source = "<stream>");
Dataset load_csv(const std::filesystem::path& path,
                 std::string_view label_column = "class");
Dataset load_csv(const std::filesystem::path& path,
                 const DatasetDescriptor& descriptor);

void write_csv(std::ostream& out, const Dataset& ds,
               std::string_view label_column = "class");

/// Human-readable mismatches against the descriptor's expectations.
std::vector<std::string> validation_warnings(const Dataset& ds,
                                             const DatasetDescriptor& descriptor);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Per-class test counts by largest remainder so the total is
/// round(P * test_fraction); each class keeps at least one training row.
/// Throws std::invalid_argument if a class has fewer than two rows.
std::vector<std::size_t> stratified_test_counts(
    std::span<const std::size_t> class_counts, double test_fraction);
SplitIndices stratified_split_indices(const Dataset& ds, const SplitSpec& spec);

struct Split {
  Dataset train;
  Dataset test;
  SplitIndices indices;
};

Split stratified_split(const Dataset& ds, const SplitSpec& spec);

/// $PNN_CHM_DATA if set, else the build-time default.
std::filesystem::path data_directory();
std::filesystem::path default_registry_path();

}  // namespace pnnchm
