#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chatter/embedding.hpp"
#include "chatter/features.hpp"
#include "chatter/persistence.hpp"
#include "chatter/stability_oracle.hpp"
#include "chatter/turning_models.hpp"

namespace chatter::io {

// Shortest text that round-trips: 17 significant digits.
std::string format_double(double value);
double parse_double(std::string_view text);

std::string read_text(const std::filesystem::path& path);
// Writes through a temporary file so readers never see a partial file.
void write_text(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

// Minimal CSV table: no quoting, comma separated, first line is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws IoError if the column is missing.
  std::size_t column(std::string_view name) const;
};
CsvTable parse_csv(std::string_view text);

// t,y
std::string time_series_csv(const TimeSeries& ts);
TimeSeries parse_time_series_csv(std::string_view text);

// x0,x1,...
std::string point_cloud_csv(const PointCloud& cloud);

// dim,birth,death
std::string diagram_csv(const std::vector<PersistenceDiagram>& diagrams);

// Header row holds the depth axis, first column the speed axis, cells 0/1.
std::string label_grid_csv(const LabelGrid& grid);
LabelGrid parse_label_grid_csv(std::string_view text);

// speed_ratio,b_lim,omega,lobe
std::string boundary_csv(const LobeBoundary& boundary);
LobeBoundary parse_boundary_csv(std::string_view text);

nlohmann::json normalizer_to_json(const Normalizer& norm);
Normalizer normalizer_from_json(const nlohmann::json& j);

}  // namespace chatter::io
