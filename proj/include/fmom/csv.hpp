#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmom/grid.hpp"
#include "fmom/panel.hpp"

namespace fmom {

enum class Layout { Long, Wide };

Layout parse_layout(std::string_view name);

struct LoadOptions {
    Layout layout = Layout::Wide;
    // Empty / non-numeric cells (and, in long layout, absent date-asset
    // pairs) become missing markers instead of parse errors.
    bool allow_missing = false;
};

/// Reads a return panel. Lines starting with `#` are comments. Rows are
/// sorted by date; long layout orders assets by identifier.
ReturnPanel load_panel(const std::filesystem::path& path, const LoadOptions& options = {});
ReturnPanel parse_panel(std::istream& in, const LoadOptions& options = {});

/// Reads one column of a wide CSV (the first one when `column` is empty).
NamedSeries load_series(const std::filesystem::path& path, std::optional<std::string> column = std::nullopt,
                        bool allow_missing = true);

/// Fixed ten-significant-digit rendering used by every emitter; missing
/// renders as an empty field.
std::string format_number(double value);

// Emitters. Output is a pure function of the arguments: wide layout, fixed
// column order, `\n` line endings, optional `# ` comment lines first.
void write_csv(std::ostream& out, const ReturnPanel& panel, const std::vector<std::string>& comments = {});
void write_csv(std::ostream& out, const GridResult& grid, const std::vector<std::string>& comments = {});

void emit_csv(const ReturnPanel& panel, const std::filesystem::path& path,
              const std::vector<std::string>& comments = {});
void emit_csv(const NamedSeries& series, const std::filesystem::path& path,
              const std::vector<std::string>& comments = {});
void emit_csv(const GridResult& grid, const std::filesystem::path& path,
              const std::vector<std::string>& comments = {});

/// Writes `contents` to `path`, raising IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace fmom
