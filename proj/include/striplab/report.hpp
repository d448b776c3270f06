#pragma once

// Artifact writers shared by the command-line runs: CSV tables (header row,
// '.' decimal, 17 significant digits), JSON reports wrapped in the
// {params, results, errors, version} envelope, self-contained SVG polyline
// plots, and a per-run manifest with content hashes so reruns can be checked
// bit for bit.

#include <striplab/version.hpp>

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace striplab {

using Json = nlohmann::ordered_json;

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    out.push_back(c);
    if (c == '"') out.push_back('"');
  }
  out.push_back('"');
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::vector<std::string>& add_row() { return rows.emplace_back(); }

  std::string to_string() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_escape(cells[i]);
      }
      out.push_back('\n');
    };
    line(header);
    for (const auto& row : rows) line(row);
    return out;
  }
};

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

inline std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for hashing: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64_hex(bytes);
}

// precedence: explicit flag, then STRIPLAB_OUT, then ./out; created on demand
inline std::filesystem::path resolve_out_dir(const std::string& flag_value) {
  std::filesystem::path dir;
  if (!flag_value.empty()) {
    dir = flag_value;
  } else if (const char* env = std::getenv("STRIPLAB_OUT"); env && *env) {
    dir = env;
  } else {
    dir = "out";
  }
  std::filesystem::create_directories(dir);
  return dir;
}

inline Json report_envelope(Json params, Json results, Json errors = Json::array()) {
  Json report;
  report["params"] = std::move(params);
  report["results"] = std::move(results);
  report["errors"] = std::move(errors);
  report["version"] = kVersion;
  return report;
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// minimal standalone polyline plot with axes, ticks, and labels
inline std::string render_svg_curve(const std::string& title, const std::string& xlabel,
                                    const std::string& ylabel, const std::vector<double>& xs,
                                    const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("svg curve needs matching x/y sizes");
  const int width = 640, height = 480, left = 70, right = 20, top = 40, bottom = 50;
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (!xs.empty()) {
    x_lo = x_hi = xs[0];
    y_lo = y_hi = ys[0];
    for (std::size_t i = 1; i < xs.size(); ++i) {
      x_lo = std::min(x_lo, xs[i]);
      x_hi = std::max(x_hi, xs[i]);
      y_lo = std::min(y_lo, ys[i]);
      y_hi = std::max(y_hi, ys[i]);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * (width - left - right); };
  auto py = [&](double y) {
    return height - bottom - (y - y_lo) / (y_hi - y_lo) * (height - top - bottom);
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title + "</text>\n";
  // axes
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(height - bottom) + "\" x2=\"" +
         num(width - right) + "\" y2=\"" + num(height - bottom) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
         num(height - bottom) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * k / 4.0;
    svg += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(height - bottom) + "\" x2=\"" +
           num(px(xv)) + "\" y2=\"" + num(height - bottom + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(height - bottom + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + num(xv) + "</text>\n";
    svg += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(py(yv)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py(yv) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + num(yv) + "</text>\n";
  }
  svg += "<text x=\"" + num((left + width - right) / 2.0) + "\" y=\"" + num(height - 12) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + xlabel + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num((top + height - bottom) / 2.0) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
         num((top + height - bottom) / 2.0) + ")\">" + ylabel + "</text>\n";
  if (!xs.empty()) {
    svg += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) svg.push_back(' ');
      svg += num(px(xs[i])) + "," + num(py(ys[i]));
    }
    svg += "\"/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
      svg += "<circle cx=\"" + num(px(xs[i])) + "\" cy=\"" + num(py(ys[i])) +
             "\" r=\"2.5\" fill=\"#1f6fb2\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// one manifest per run: full parameter set plus a content hash per artifact
inline void write_manifest(const std::filesystem::path& dir, const std::string& subcommand,
                           const Json& params, const std::vector<std::filesystem::path>& artifacts) {
  Json manifest;
  manifest["subcommand"] = subcommand;
  manifest["params"] = params;
  Json hashes = Json::object();
  for (const auto& a : artifacts) hashes[a.filename().string()] = hash_file(a);
  manifest["artifacts"] = std::move(hashes);
  manifest["version"] = kVersion;
  write_json_file(dir / "manifest.json", manifest);
}

}  // namespace striplab
