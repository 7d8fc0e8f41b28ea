#pragma once

#include "resavg/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace resavg {

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double x);

[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);
[[nodiscard]] std::string hex64(std::uint64_t x);

/// Plain CSV with a fixed header. Fields are numbers or identifiers, so no quoting.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

    CsvWriter& field(std::string_view text);
    CsvWriter& field(double x);
    CsvWriter& field(std::size_t x);
    void end_row();

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

void write_text(const std::filesystem::path& path, std::string_view text);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

/// --out-dir when given, else $RESAVG_OUT_DIR, else ./resavg_out.
[[nodiscard]] std::filesystem::path resolve_out_dir(const std::string& flag_value);

/// Columnar ensemble export: '#' header lines (scenario hash, epsilon, seed), then
/// traj_id, tau, re_1, im_1, ..., re_n, im_n per checkpoint of every trajectory.
void write_ensemble_csv(const std::filesystem::path& path, const SdeEnsemble& e, std::uint64_t scenario_hash);

}  // namespace resavg
