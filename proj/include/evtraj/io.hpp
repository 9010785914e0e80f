#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evtraj/types.hpp"

namespace evtraj {

/// EVT1: little-endian, 16-byte header (magic "EVT1", u32 width, u32 height,
/// u32 event_count) followed by 16-byte records (u16 x, u16 y, u32 reserved,
/// u64 t_us with polarity in bit 63).
void write_evt1(std::ostream& out, std::span<const Event> events, int width = kSensorWidth,
                int height = kSensorHeight);
std::vector<Event> read_evt1(std::istream& in);

/// CSV with header `x,y,t_us,p`.
void write_events_csv(std::ostream& out, std::span<const Event> events);
std::vector<Event> read_events_csv(std::istream& in);

/// TRK1: magic "TRK1", u32 count, then per point f32 x, f32 y, u64 t_us.
void write_trk1(std::ostream& out, std::span<const TrackPoint> points);
std::vector<TrackPoint> read_trk1(std::istream& in);

/// CSV with header `x_b,y_b,t_us`; coordinates use the shortest decimal form
/// that round-trips exactly.
void write_track_csv(std::ostream& out, std::span<const TrackPoint> points);
std::vector<TrackPoint> read_track_csv(std::istream& in);

/// Rounds x and y to the f32 values TRK1 stores.
void round_to_track_precision(std::span<TrackPoint> points);

enum class FileFormat { Csv, Binary };

// Picks the format from the extension (.csv -> Csv, anything else -> Binary).
FileFormat format_for_path(const std::filesystem::path& path);

void save_events(const std::filesystem::path& path, std::span<const Event> events,
                 FileFormat format);
std::vector<Event> load_events(const std::filesystem::path& path);

void save_track(const std::filesystem::path& path, std::span<const TrackPoint> points,
                FileFormat format);
std::vector<TrackPoint> load_track(const std::filesystem::path& path);

// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace evtraj
