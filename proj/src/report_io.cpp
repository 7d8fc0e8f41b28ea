#include "resavg/report_io.hpp"

#include "resavg/errors.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

namespace resavg {

namespace {
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::string hex64(std::uint64_t x) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

CsvWriter& CsvWriter::field(std::string_view text) {
    if (in_row_ == columns_) throw Error("CSV row has too many fields: " + path_.string());
    out_ << (in_row_++ ? "," : "") << text;
    return *this;
}

CsvWriter& CsvWriter::field(double x) { return field(format_double(x)); }

CsvWriter& CsvWriter::field(std::size_t x) { return field(std::to_string(x)); }

void CsvWriter::end_row() {
    if (in_row_ != columns_) throw Error("CSV row has too few fields: " + path_.string());
    out_ << '\n';
    in_row_ = 0;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path resolve_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("RESAVG_OUT_DIR"); env && *env) return env;
    return "resavg_out";
}

void write_ensemble_csv(const std::filesystem::path& path, const SdeEnsemble& e, std::uint64_t scenario_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "# scenario_hash=" << hex64(scenario_hash) << '\n';
    out << "# epsilon=" << format_double(e.config().epsilon) << '\n';
    out << "# seed=" << e.config().master_seed << '\n';
    out << "traj_id,tau";
    for (std::size_t j = 1; j <= e.dim(); ++j) out << ",re_" << j << ",im_" << j;
    out << '\n';
    for (std::size_t t = 0; t < e.size(); ++t) {
        for (std::size_t c = 0; c < e.n_checkpoints(); ++c) {
            out << t << ',' << format_double(e.checkpoint_times()[c]);
            for (const auto& z : e.state(t, c)) out << ',' << format_double(z.real()) << ',' << format_double(z.imag());
            out << '\n';
        }
    }
}

}  // namespace resavg
