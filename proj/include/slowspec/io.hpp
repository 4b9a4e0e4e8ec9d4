#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slowspec/types.hpp"

namespace slowspec {

/// Full-precision "%.17g" rendering used by every CSV writer, so repeated
/// runs produce byte-identical files.
std::string format_g17(double v);

void write_matrix_csv(const std::filesystem::path& path,
                      const Eigen::Ref<const Matrix>& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Eigen::Ref<const Matrix>& m);
Matrix matrix_from_json(const nlohmann::json& j);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// CSV with a header row and equal-length columns.
void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& header,
                     const std::vector<Vector>& columns);

}  // namespace slowspec
