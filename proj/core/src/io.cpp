#include "hoam/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "hoam/errors.hpp"

namespace hoam::io {

namespace {

std::string pgm_header(std::size_t nx, std::size_t ny) {
  std::ostringstream out;
  out << "P5\n" << nx << ' ' << ny << "\n65535\n";
  return out.str();
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v & 0xff));
}

std::uint16_t to_level(double v, double full_scale) {
  if (!(full_scale > 0.0) || !(v > 0.0)) return 0;
  const double level = std::round(v / full_scale * 65535.0);
  return static_cast<std::uint16_t>(std::clamp(level, 0.0, 65535.0));
}

double parse_double(std::string_view s) {
  double v = 0.0;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{}) throw IoError("malformed number in CSV: '" + std::string(s) + "'");
  (void)ptr;
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string to_pgm16(const RealImage& image, double full_scale) {
  if (!(full_scale > 0.0)) {
    full_scale = 0.0;
    for (double v : image.values) full_scale = std::max(full_scale, v);
  }
  std::string out = pgm_header(image.nx, image.ny);
  out.reserve(out.size() + 2 * image.values.size());
  // PGM rows run top to bottom; row 0 of the file is the largest y.
  for (std::size_t r = 0; r < image.ny; ++r) {
    const std::size_t j = image.ny - 1 - r;
    for (std::size_t i = 0; i < image.nx; ++i) put_u16(out, to_level(image(i, j), full_scale));
  }
  return out;
}

std::string to_pgm16(std::size_t nx, std::size_t ny, const std::vector<std::uint64_t>& counts) {
  RealImage img(nx, ny);
  for (std::size_t k = 0; k < counts.size() && k < img.values.size(); ++k) {
    img.values[k] = static_cast<double>(counts[k]);
  }
  return to_pgm16(img);
}

std::string to_csv(const RealImage& image, const GridSpec& grid) {
  std::string out = "# nx=" + std::to_string(grid.nx) + ",ny=" + std::to_string(grid.ny) +
                    ",dx=" + format_double(grid.dx) + ",dy=" + format_double(grid.dy) +
                    ",wavelength=" + format_double(grid.wavelength) + "\n";
  for (std::size_t j = 0; j < image.ny; ++j) {
    for (std::size_t i = 0; i < image.nx; ++i) {
      if (i) out.push_back(',');
      out += format_double(image(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

std::pair<RealImage, GridSpec> from_csv(std::string_view text) {
  const auto eol = text.find('\n');
  if (text.substr(0, 2) != "# " || eol == std::string_view::npos) throw IoError("CSV lacks grid header");
  GridSpec grid;
  std::string_view header = text.substr(2, eol - 2);
  while (!header.empty()) {
    const auto comma = header.find(',');
    const auto item = header.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw IoError("malformed CSV header");
    const auto key = item.substr(0, eq);
    const double value = parse_double(item.substr(eq + 1));
    if (key == "nx") grid.nx = static_cast<std::size_t>(value);
    else if (key == "ny") grid.ny = static_cast<std::size_t>(value);
    else if (key == "dx") grid.dx = value;
    else if (key == "dy") grid.dy = value;
    else if (key == "wavelength") grid.wavelength = value;
    header = comma == std::string_view::npos ? std::string_view{} : header.substr(comma + 1);
  }
  grid.validate();

  RealImage img(grid.nx, grid.ny);
  std::string_view body = text.substr(eol + 1);
  for (std::size_t j = 0; j < grid.ny; ++j) {
    const auto line_end = body.find('\n');
    std::string_view line = body.substr(0, line_end);
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const auto comma = line.find(',');
      img(i, j) = parse_double(line.substr(0, comma));
      if (comma == std::string_view::npos && i + 1 < grid.nx) throw IoError("CSV row too short");
      line = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
    }
    if (line_end == std::string_view::npos && j + 1 < grid.ny) throw IoError("CSV has too few rows");
    body = line_end == std::string_view::npos ? std::string_view{} : body.substr(line_end + 1);
  }
  return {std::move(img), grid};
}

namespace {

constexpr std::string_view kRecordHeader = "setting,mask_offset,duration_s,singles_alice,singles_bob,coincidences";

std::uint64_t parse_count(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw IoError("malformed count in CSV: '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string records_to_csv(const std::vector<CountRecord>& records) {
  std::string out(kRecordHeader);
  out.push_back('\n');
  for (const auto& r : records) {
    if (r.setting.find_first_of(",\n") != std::string::npos) throw IoError("setting label contains a separator");
    out += r.setting + ',' + format_double(r.mask_offset) + ',' + format_double(r.duration) + ',' +
           std::to_string(r.singles_alice) + ',' + std::to_string(r.singles_bob) + ',' +
           std::to_string(r.coincidences) + '\n';
  }
  return out;
}

std::vector<CountRecord> records_from_csv(std::string_view text) {
  std::vector<CountRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (line_no == 1 || line == kRecordHeader) {
      if (line != kRecordHeader) throw IoError("count CSV header must be '" + std::string(kRecordHeader) + "'");
      continue;
    }
    std::vector<std::string_view> cols;
    while (true) {
      const auto comma = line.find(',');
      cols.push_back(line.substr(0, comma));
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (cols.size() != 6) throw IoError("count CSV line " + std::to_string(line_no) + ": expected 6 columns");
    CountRecord r;
    r.setting = std::string(cols[0]);
    r.mask_offset = parse_double(cols[1]);
    r.duration = parse_double(cols[2]);
    r.singles_alice = parse_count(cols[3]);
    r.singles_bob = parse_count(cols[4]);
    r.coincidences = parse_count(cols[5]);
    if (!(r.duration > 0.0)) throw IoError("count CSV line " + std::to_string(line_no) + ": duration must be positive");
    out.push_back(std::move(r));
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hoam::io
