#include <nsdim/report.hpp>

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace nsdim::report {

namespace fs = std::filesystem;

namespace {

std::string to_hex(const unsigned char* data, unsigned len) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xF]);
  }
  return out;
}

using DigestCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

DigestCtx new_sha256() {
  DigestCtx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest init failed");
  }
  return ctx;
}

std::string finish_digest(EVP_MD_CTX* ctx) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_DigestFinal_ex(ctx, md, &len) != 1) throw std::runtime_error("sha256: digest final failed");
  return to_hex(md, len);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

const BundleFile* ReportBundle::find(std::string_view path) const {
  for (const auto& f : files) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

std::string sha256_hex(std::string_view data) {
  auto ctx = new_sha256();
  EVP_DigestUpdate(ctx.get(), data.data(), data.size());
  return finish_digest(ctx.get());
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  auto ctx = new_sha256();
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  return finish_digest(ctx.get());
}

BundleWriter::BundleWriter(fs::path dir) {
  bundle_.dir = std::move(dir);
  fs::create_directories(bundle_.dir);
}

BundleWriter::BundleWriter(ReportBundle existing) : bundle_(std::move(existing)) {
  fs::create_directories(bundle_.dir);
}

void BundleWriter::write(const std::string& relative_path, const std::string& content) {
  const fs::path target = bundle_.dir / relative_path;
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  {
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + target.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for '" + target.string() + "'");
  }
  BundleFile entry{relative_path, sha256_hex(content), content.size()};
  auto it = std::find_if(bundle_.files.begin(), bundle_.files.end(),
                         [&](const BundleFile& f) { return f.path == relative_path; });
  if (it != bundle_.files.end()) {
    *it = entry;
  } else {
    bundle_.files.push_back(entry);
  }
}

void BundleWriter::write_existing(const std::string& relative_path) {
  const fs::path target = bundle_.dir / relative_path;
  BundleFile entry{relative_path, sha256_file(target), fs::file_size(target)};
  auto it = std::find_if(bundle_.files.begin(), bundle_.files.end(),
                         [&](const BundleFile& f) { return f.path == relative_path; });
  if (it != bundle_.files.end()) {
    *it = entry;
  } else {
    bundle_.files.push_back(entry);
  }
}

ReportBundle BundleWriter::finish(bool complete) {
  bundle_.complete = complete;
  std::sort(bundle_.files.begin(), bundle_.files.end(),
            [](const BundleFile& a, const BundleFile& b) { return a.path < b.path; });
  Json manifest;
  manifest["format"] = kBundleFormat;
  manifest["complete"] = complete;
  Json files = Json::array();
  for (const auto& f : bundle_.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  manifest["files"] = files;
  const std::string text = manifest.dump(2) + "\n";
  std::ofstream out(bundle_.dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in '" + bundle_.dir.string() + "'");
  out << text;
  return bundle_;
}

ReportBundle load_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("no manifest.json in '" + dir.string() + "'");
  const Json j = Json::parse(in);
  if (j.value("format", "") != kBundleFormat) throw std::runtime_error("manifest: unexpected format");
  ReportBundle b;
  b.dir = dir;
  b.complete = j.at("complete").get<bool>();
  for (const auto& f : j.at("files")) {
    b.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                       f.at("bytes").get<std::uintmax_t>()});
  }
  return b;
}

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

std::size_t CsvTable::column(std::string_view name, std::string_view source) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::runtime_error(std::string(source) + ": missing column '" + std::string(name) + "'");
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  bool first = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (first) {
      while (std::getline(ss, cell, ',')) t.header.push_back(trim(cell));
      first = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      const std::string c = trim(cell);
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (c.empty() || res.ec != std::errc() || res.ptr != c.data() + c.size()) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": non-numeric cell '" + c + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.header.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " cells");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace nsdim::report
