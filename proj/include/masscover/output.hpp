#ifndef MASSCOVER_OUTPUT_HPP
#define MASSCOVER_OUTPUT_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace masscover {

/// Round-trippable, locale-independent double formatting (%.17g).
std::string format_double(double v);

/// Writes via a temp file in the same directory plus rename, so a declared
/// output path never holds a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

/// Stable 64-bit digest for canonicalized run configurations.
std::uint64_t fnv1a64(std::string_view s);

/// Minimal self-contained SVG: one polyline over the given points with axis
/// labels. No external assets.
std::string render_svg_curve(std::span<const double> xs, std::span<const double> ys,
                             const std::string& x_label, const std::string& y_label);

/// Appends one line to the results index. Location is MASSCOVER_RESULTS_DIR
/// when set, the current directory otherwise.
void append_result_record(const std::string& line);

}  // namespace masscover

#endif
