#include "chatter/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chatter/errors.hpp"

namespace chatter::io {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string file_sha256(const fs::path& path) { return sha256_hex(read_text(path)); }

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw IoError("missing CSV column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  bool first = true;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size()) {
        throw IoError("CSV row has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw IoError("empty CSV");
  return table;
}

std::string time_series_csv(const TimeSeries& ts) {
  std::string out = "t,y\n";
  for (std::size_t n = 0; n < ts.size(); ++n) {
    out += format_double(ts.time(n));
    out += ',';
    out += format_double(ts.values[n]);
    out += '\n';
  }
  return out;
}

TimeSeries parse_time_series_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  const std::size_t tc = table.column("t");
  const std::size_t yc = table.column("y");
  if (table.rows.size() < 2) throw InsufficientSamples("time series CSV needs at least 2 rows");
  TimeSeries ts;
  ts.t0 = parse_double(table.rows[0][tc]);
  ts.dt = parse_double(table.rows[1][tc]) - ts.t0;
  ts.values.reserve(table.rows.size());
  for (const auto& row : table.rows) ts.values.push_back(parse_double(row[yc]));
  return ts;
}

std::string point_cloud_csv(const PointCloud& cloud) {
  std::string out;
  for (std::size_t a = 0; a < cloud.dim(); ++a) {
    if (a) out += ',';
    out += "x" + std::to_string(a);
  }
  out += '\n';
  for (std::size_t p = 0; p < cloud.size(); ++p) {
    for (std::size_t a = 0; a < cloud.dim(); ++a) {
      if (a) out += ',';
      out += format_double(cloud(p, a));
    }
    out += '\n';
  }
  return out;
}

std::string diagram_csv(const std::vector<PersistenceDiagram>& diagrams) {
  std::string out = "dim,birth,death\n";
  for (const auto& pd : diagrams) {
    for (const auto& p : pd.sorted().pairs) {
      out += std::to_string(pd.dim) + ',' + format_double(p.birth) + ',' +
             format_double(p.death) + '\n';
    }
  }
  return out;
}

std::string label_grid_csv(const LabelGrid& grid) {
  std::string out = "speed_ratio";
  for (double b : grid.depth_axis) out += ',' + format_double(b);
  out += '\n';
  for (std::size_t i = 0; i < grid.speed_axis.size(); ++i) {
    out += format_double(grid.speed_axis[i]);
    for (std::size_t j = 0; j < grid.depth_axis.size(); ++j) {
      out += grid.labels[i][j] ? ",1" : ",0";
    }
    out += '\n';
  }
  return out;
}

LabelGrid parse_label_grid_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  LabelGrid grid;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    grid.depth_axis.push_back(parse_double(table.header[c]));
  }
  for (const auto& row : table.rows) {
    grid.speed_axis.push_back(parse_double(row[0]));
    std::vector<bool> labels;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] != "0" && row[c] != "1") throw IoError("label cell must be 0 or 1");
      labels.push_back(row[c] == "1");
    }
    grid.labels.push_back(std::move(labels));
  }
  return grid;
}

std::string boundary_csv(const LobeBoundary& boundary) {
  std::string out = "speed_ratio,b_lim,omega,lobe\n";
  for (const auto& p : boundary.samples) {
    out += format_double(p.speed_ratio) + ',' + format_double(p.b_lim) + ',' +
           format_double(p.omega) + ',' + std::to_string(p.lobe) + '\n';
  }
  return out;
}

LobeBoundary parse_boundary_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  const std::size_t sc = table.column("speed_ratio");
  const std::size_t bc = table.column("b_lim");
  const std::size_t oc = table.column("omega");
  const std::size_t lc = table.column("lobe");
  LobeBoundary boundary;
  for (const auto& row : table.rows) {
    boundary.samples.push_back({parse_double(row[sc]), parse_double(row[bc]),
                                parse_double(row[oc]), std::stoi(row[lc])});
  }
  return boundary;
}

nlohmann::json normalizer_to_json(const Normalizer& norm) {
  return {{"means", norm.means}, {"stds", norm.stds}};
}

Normalizer normalizer_from_json(const nlohmann::json& j) {
  Normalizer norm;
  try {
    norm.means = j.at("means").get<FeatureVector>();
    norm.stds = j.at("stds").get<FeatureVector>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad normalizer JSON: ") + e.what());
  }
  return norm;
}

}  // namespace chatter::io
