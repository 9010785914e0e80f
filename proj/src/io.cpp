#include "evtraj/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>

#include "evtraj/error.hpp"

namespace evtraj {
namespace {

constexpr std::uint64_t kPolarityBit = std::uint64_t{1} << 63;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError(std::string("truncated file while reading ") + what);
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

void expect_magic(std::istream& in, std::string_view magic) {
  std::array<char, 4> got{};
  in.read(got.data(), got.size());
  if (in.gcount() != 4 || std::string_view(got.data(), 4) != magic) {
    throw FormatError("bad magic, expected " + std::string(magic));
  }
}

void expect_eof(std::istream& in) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after declared record count");
  }
}

void check_stream(const std::ostream& out) {
  if (!out) throw IoError("write failed");
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw FormatError("malformed CSV field '" + std::string(field) + "' on line " +
                      std::to_string(line_no));
  }
  return value;
}

// Reads lines with the expected header; calls `row` for every non-empty data line.
template <typename Fn>
void read_csv(std::istream& in, std::string_view header, std::size_t columns, Fn&& row) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw FormatError("unexpected CSV header '" + line + "'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != columns) {
      throw FormatError("expected " + std::to_string(columns) + " columns on line " +
                        std::to_string(line_no));
    }
    row(fields, line_no);
  }
}

Event make_event(std::int64_t x, std::int64_t y, std::int64_t t, std::int64_t p,
                 std::size_t line_no) {
  if (x < 0 || x >= kSensorWidth || y < 0 || y >= kSensorHeight) {
    throw FormatError("event outside sensor on line " + std::to_string(line_no));
  }
  if (t < 0) throw FormatError("negative timestamp on line " + std::to_string(line_no));
  if (p != 0 && p != 1) throw FormatError("polarity must be 0 or 1");
  return Event{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), t, p == 1};
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

bool starts_with_magic(std::istream& in, std::string_view magic) {
  std::array<char, 4> got{};
  in.read(got.data(), got.size());
  const bool match = in.gcount() == 4 && std::string_view(got.data(), 4) == magic;
  in.clear();
  in.seekg(0);
  return match;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void write_evt1(std::ostream& out, std::span<const Event> events, int width, int height) {
  if (events.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("too many events for EVT1");
  }
  out.write("EVT1", 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(width));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(height));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(events.size()));
  for (const Event& e : events) {
    if (e.t_us < 0) throw InvalidArgument("EVT1 cannot store negative timestamps");
    put_le<std::uint16_t>(out, e.x);
    put_le<std::uint16_t>(out, e.y);
    put_le<std::uint32_t>(out, 0);
    const auto t = static_cast<std::uint64_t>(e.t_us);
    put_le<std::uint64_t>(out, e.polarity ? (t | kPolarityBit) : t);
  }
  check_stream(out);
}

std::vector<Event> read_evt1(std::istream& in) {
  expect_magic(in, "EVT1");
  const auto width = get_le<std::uint32_t>(in, "width");
  const auto height = get_le<std::uint32_t>(in, "height");
  const auto count = get_le<std::uint32_t>(in, "event count");
  if (width != kSensorWidth || height != kSensorHeight) {
    throw FormatError("EVT1 sensor size " + std::to_string(width) + "x" +
                      std::to_string(height) + " is not 304x240");
  }
  std::vector<Event> events;
  events.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Event e;
    e.x = get_le<std::uint16_t>(in, "event x");
    e.y = get_le<std::uint16_t>(in, "event y");
    if (get_le<std::uint32_t>(in, "reserved") != 0) throw FormatError("reserved field not zero");
    const auto word = get_le<std::uint64_t>(in, "event timestamp");
    e.polarity = (word & kPolarityBit) != 0;
    e.t_us = static_cast<std::int64_t>(word & ~kPolarityBit);
    if (e.x >= width || e.y >= height) throw FormatError("EVT1 event outside sensor");
    events.push_back(e);
  }
  expect_eof(in);
  return events;
}

void write_events_csv(std::ostream& out, std::span<const Event> events) {
  out << "x,y,t_us,p\n";
  for (const Event& e : events) {
    out << e.x << ',' << e.y << ',' << e.t_us << ',' << (e.polarity ? 1 : 0) << '\n';
  }
  check_stream(out);
}

std::vector<Event> read_events_csv(std::istream& in) {
  std::vector<Event> events;
  read_csv(in, "x,y,t_us,p", 4, [&](const auto& f, std::size_t line_no) {
    events.push_back(make_event(parse_field<std::int64_t>(f[0], line_no),
                                parse_field<std::int64_t>(f[1], line_no),
                                parse_field<std::int64_t>(f[2], line_no),
                                parse_field<std::int64_t>(f[3], line_no), line_no));
  });
  return events;
}

void write_trk1(std::ostream& out, std::span<const TrackPoint> points) {
  if (points.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("too many points for TRK1");
  }
  out.write("TRK1", 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(points.size()));
  for (const TrackPoint& p : points) {
    if (p.t_us < 0) throw InvalidArgument("TRK1 cannot store negative timestamps");
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(p.x)));
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(p.y)));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(p.t_us));
  }
  check_stream(out);
}

std::vector<TrackPoint> read_trk1(std::istream& in) {
  expect_magic(in, "TRK1");
  const auto count = get_le<std::uint32_t>(in, "point count");
  std::vector<TrackPoint> points;
  points.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    TrackPoint p;
    p.x = std::bit_cast<float>(get_le<std::uint32_t>(in, "x"));
    p.y = std::bit_cast<float>(get_le<std::uint32_t>(in, "y"));
    const auto t = get_le<std::uint64_t>(in, "timestamp");
    if (t > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw FormatError("TRK1 timestamp out of range");
    }
    p.t_us = static_cast<std::int64_t>(t);
    points.push_back(p);
  }
  expect_eof(in);
  return points;
}

void write_track_csv(std::ostream& out, std::span<const TrackPoint> points) {
  out << "x_b,y_b,t_us\n";
  for (const TrackPoint& p : points) {
    out << format_double(p.x) << ',' << format_double(p.y) << ',' << p.t_us << '\n';
  }
  check_stream(out);
}

std::vector<TrackPoint> read_track_csv(std::istream& in) {
  std::vector<TrackPoint> points;
  read_csv(in, "x_b,y_b,t_us", 3, [&](const auto& f, std::size_t line_no) {
    points.push_back(TrackPoint{parse_field<double>(f[0], line_no),
                                parse_field<double>(f[1], line_no),
                                parse_field<std::int64_t>(f[2], line_no)});
  });
  return points;
}

FileFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::Csv : FileFormat::Binary;
}

void save_events(const std::filesystem::path& path, std::span<const Event> events,
                 FileFormat format) {
  auto out = open_out(path);
  if (format == FileFormat::Csv) {
    write_events_csv(out, events);
  } else {
    write_evt1(out, events);
  }
}

std::vector<Event> load_events(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (starts_with_magic(in, "EVT1")) return read_evt1(in);
  return read_events_csv(in);
}

void save_track(const std::filesystem::path& path, std::span<const TrackPoint> points,
                FileFormat format) {
  auto out = open_out(path);
  if (format == FileFormat::Csv) {
    write_track_csv(out, points);
  } else {
    write_trk1(out, points);
  }
}

std::vector<TrackPoint> load_track(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (starts_with_magic(in, "TRK1")) return read_trk1(in);
  return read_track_csv(in);
}

// Kept out of line and scalar: GCC 11's SLP vectorizer folds an inlined
// double -> float -> double round trip into a no-op at -O3.
__attribute__((noinline, optimize("no-tree-slp-vectorize")))
void round_to_track_precision(std::span<TrackPoint> points) {
  for (auto& p : points) {
    p.x = static_cast<double>(static_cast<float>(p.x));
    p.y = static_cast<double>(static_cast<float>(p.y));
  }
}

}  // namespace evtraj
