#pragma once

#include <string>
#include <utility>
#include <vector>

namespace trap::report {

/// Comma-separated, LF line endings, no quoting (values must not
/// contain commas or newlines).
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string to_text() const;
    static Csv parse(const std::string& text, const std::string& origin);
    int column(const std::string& name) const;  // -1 when absent
};

/// Fixed six decimal places; the one float format used in every CSV.
std::string format_value(double v);

void write_csv(const std::string& path, const Csv& csv);
Csv read_csv(const std::string& path);

using Series = std::pair<std::string, std::vector<std::pair<double, double>>>;

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series);

/// One SVG per curve group found in the known CSVs of dir
/// (asr/destruction/rfd/trace). Returns the number of files written.
int emit_plots(const std::string& dir);

/// Inputs, seeds and output checksums of one run; re-running the same
/// config and seed reproduces it byte for byte.
class Manifest {
  public:
    void set_config_hash(uint64_t h) { config_hash_ = h; }
    void set_master_seed(uint64_t s) { master_seed_ = s; }
    void add_seed(const std::string& stage, uint64_t seed);
    void add_file(const std::string& dir, const std::string& name);
    void write(const std::string& path) const;

  private:
    uint64_t config_hash_ = 0, master_seed_ = 0;
    std::vector<std::pair<std::string, uint64_t>> seeds_;
    std::vector<std::pair<std::string, uint64_t>> files_;  // name, fnv1a of contents
};

}  // namespace trap::report
