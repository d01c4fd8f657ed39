#include "pnnchm/fetch.hpp"

#include <curl/curl.h>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pnnchm {

namespace {

std::size_t write_body(char* ptr, std::size_t size, std::size_t nmemb, void* user) {
  static_cast<std::string*>(user)->append(ptr, size * nmemb);
  return size * nmemb;
}

void curl_global() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string> tokens(std::string_view line, const RawFormat& fmt) {
  std::vector<std::string> out;
  if (fmt.whitespace) {
    std::istringstream ss{std::string(line)};
    std::string t;
    while (ss >> t) out.push_back(t);
    return out;
  }
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == fmt.delimiter && !quoted) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

bool missing(std::string_view t) { return t.empty() || t == "?" || t == "NA"; }

bool numeric(std::string_view t) {
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  return res.ec == std::errc{} && res.ptr == t.data() + t.size();
}

std::size_t resolve(int index, std::size_t width) {
  const long i = index < 0 ? static_cast<long>(width) + index : index;
  if (i < 0 || i >= static_cast<long>(width)) {
    throw std::runtime_error("column index " + std::to_string(index) +
                             " outside a row of " + std::to_string(width));
  }
  return static_cast<std::size_t>(i);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c != '"') q.push_back(c);
  }
  return q + "\"";
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string download(const std::string& url) {
  curl_global();
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(),
                                                           &curl_easy_cleanup);
  if (!curl) throw std::runtime_error("curl_easy_init failed");
  std::string body;
  char err[CURL_ERROR_SIZE] = {0};
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 20L);
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, 120L);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_body);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
  curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, err);
  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) {
    throw std::runtime_error(url + ": " + (err[0] ? err : curl_easy_strerror(rc)));
  }
  return body;
}

std::string convert_to_canonical(std::string_view raw,
                                 const DatasetDescriptor& descriptor) {
  const RawFormat& fmt = descriptor.raw;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::istringstream in{std::string(raw)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto t = tokens(line, fmt);
    if (fmt.header && header.empty()) {
      header = std::move(t);
      continue;
    }
    rows.push_back(std::move(t));
  }
  if (rows.empty()) throw std::runtime_error(descriptor.name + ": no data rows");

  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw std::runtime_error(descriptor.name + ": raw row " + std::to_string(r) +
                               " has " + std::to_string(rows[r].size()) +
                               " fields, expected " + std::to_string(width));
    }
  }
  if (!header.empty() && header.size() != width) {
    throw std::runtime_error(descriptor.name + ": header width differs from rows");
  }

  std::size_t label = 0;
  if (const auto* name = std::get_if<std::string>(&fmt.label)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) {
      throw std::runtime_error(descriptor.name + ": no raw column '" + *name + "'");
    }
    label = static_cast<std::size_t>(it - header.begin());
  } else {
    label = resolve(std::get<int>(fmt.label), width);
  }
  std::vector<bool> dropped(width, false);
  for (int d : fmt.drop) dropped[resolve(d, width)] = true;
  if (dropped[label]) throw std::runtime_error(descriptor.name + ": label column dropped");

  std::vector<std::size_t> features;
  for (std::size_t c = 0; c < width; ++c) {
    if (c != label && !dropped[c]) features.push_back(c);
  }

  if (fmt.drop_incomplete) {
    std::erase_if(rows, [&](const auto& r) {
      return missing(r[label]) || std::any_of(features.begin(), features.end(),
                                              [&](std::size_t c) { return missing(r[c]); });
    });
  }
  if (fmt.min_class_size > 0) {
    std::map<std::string, std::size_t> sizes;
    for (const auto& r : rows) ++sizes[r[label]];
    std::erase_if(rows, [&](const auto& r) { return sizes[r[label]] < fmt.min_class_size; });
  }

  // categorical columns are coded by first appearance
  std::vector<std::map<std::string, std::size_t>> codes(width);
  std::vector<bool> categorical(width, false);
  for (std::size_t c : features) {
    categorical[c] = std::any_of(rows.begin(), rows.end(), [&](const auto& r) {
      return !missing(r[c]) && !numeric(r[c]);
    });
  }

  std::ostringstream out;
  for (std::size_t c : features) {
    out << csv_field(header.empty() ? "f" + std::to_string(c) : header[c]) << ',';
  }
  out << descriptor.label_column << '\n';
  for (const auto& r : rows) {
    for (std::size_t c : features) {
      if (categorical[c] && !missing(r[c])) {
        auto [it, _] = codes[c].try_emplace(r[c], codes[c].size());
        out << it->second << ',';
      } else {
        out << r[c] << ',';
      }
    }
    out << csv_field(r[label]) << '\n';
  }
  return out.str();
}

std::vector<FetchOutcome> fetch_all(const std::vector<DatasetDescriptor>& registry,
                                    const std::filesystem::path& dir, bool force,
                                    std::ostream* log) {
  std::filesystem::create_directories(dir);
  std::vector<FetchOutcome> outcomes;
  for (const auto& d : registry) {
    FetchOutcome o;
    o.name = d.name;
    const auto target = dir / d.file;
    try {
      if (!force && std::filesystem::exists(target)) {
        const Dataset ds = load_csv(target, d);
        o.status = FetchOutcome::Status::Cached;
        o.warnings = validation_warnings(ds, d);
        o.message = "cached";
      } else {
        std::string raw;
        const auto local = dir / (d.name + ".raw");
        if (std::filesystem::exists(local)) {
          std::ifstream f(local, std::ios::binary);
          raw.assign(std::istreambuf_iterator<char>(f), {});
        } else if (d.urls.empty()) {
          throw std::runtime_error("no download source" +
                                   (d.note.empty() ? std::string() : ": " + d.note));
        } else {
          auto fetch_once = [&] {
            std::string bytes;
            for (const auto& url : d.urls) bytes += download(url);
            return bytes;
          };
          raw = fetch_once();
          if (!d.sha256.empty() && sha256_hex(raw) != d.sha256) {
            raw = fetch_once();
            if (sha256_hex(raw) != d.sha256) {
              throw std::runtime_error("checksum mismatch after re-download");
            }
          }
        }
        const std::string csv = convert_to_canonical(raw, d);
        const auto tmp = target.string() + ".tmp";
        {
          std::ofstream f(tmp, std::ios::binary);
          f << csv;
          if (!f) throw std::runtime_error("cannot write " + tmp);
        }
        const Dataset ds = load_csv(tmp, d);
        std::filesystem::rename(tmp, target);
        o.status = FetchOutcome::Status::Downloaded;
        o.warnings = validation_warnings(ds, d);
        o.message = "wrote " + target.string();
      }
    } catch (const std::exception& e) {
      o.status = FetchOutcome::Status::Failed;
      o.message = e.what();
    }
    if (log) {
      *log << d.name << ": " << o.message << '\n';
      for (const auto& w : o.warnings) *log << "  warning: " << w << '\n';
    }
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

}  // namespace pnnchm
