#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pnnchm/dataset_io.hpp"

namespace pnnchm {

std::string sha256_hex(std::string_view bytes);

/// Fetches `url` (any scheme libcurl supports, including file://).
/// Throws std::runtime_error on transport or HTTP errors.
std::string download(const std::string& url);

/// Converts a raw source file into canonical CSV text following
/// `descriptor.raw`. Non-numeric feature columns are coded 0, 1, ... in
/// order of first appearance. Throws std::runtime_error on malformed input.
std::string convert_to_canonical(std::string_view raw,
                                 const DatasetDescriptor& descriptor);

struct FetchOutcome {
  enum class Status { Cached, Downloaded, Failed };
  std::string name;
  Status status = Status::Failed;
  std::string message;
  std::vector<std::string> warnings;
};

/// Downloads, verifies and converts every descriptor into `dir`. A dataset
/// whose canonical file already loads is left alone unless `force`. A local
/// `<name>.raw` file in `dir` stands in for the download. Failures are
/// reported per dataset; the rest still run.
std::vector<FetchOutcome> fetch_all(const std::vector<DatasetDescriptor>& registry,
                                    const std::filesystem::path& dir,
                                    bool force = false,
                                    std::ostream* log = nullptr);

}  // namespace pnnchm
