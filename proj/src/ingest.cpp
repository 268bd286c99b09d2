#include "spillnet/ingest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "spillnet/error.hpp"
#include "spillnet/jsonutil.hpp"

namespace spillnet::ingest {
namespace {

using json = nlohmann::json;
using jsonutil::check_schema_version;
using jsonutil::require;
using jsonutil::schema_error;

std::int32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  const std::uint32_t v = (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
                          (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
  return static_cast<std::int32_t>(v);
}

std::int32_t read_le32(std::span<const std::uint8_t> b, std::size_t at) {
  const std::uint32_t v = std::uint32_t{b[at]} | (std::uint32_t{b[at + 1]} << 8) |
                          (std::uint32_t{b[at + 2]} << 16) | (std::uint32_t{b[at + 3]} << 24);
  return static_cast<std::int32_t>(v);
}

double read_le_double(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
  return std::bit_cast<double>(v);
}

void put_be32(std::vector<std::uint8_t>& out, std::int32_t value) {
  const auto v = static_cast<std::uint32_t>(value);
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_le32(std::vector<std::uint8_t>& out, std::int32_t value) {
  const auto v = static_cast<std::uint32_t>(value);
  for (int shift = 0; shift <= 24; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_le_double(std::vector<std::uint8_t>& out, double value) {
  const auto v = std::bit_cast<std::uint64_t>(value);
  for (int shift = 0; shift <= 56; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

double signed_area(std::span<const geo::LonLat> ring) {
  double s = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& p = ring[i];
    const auto& q = ring[(i + 1) % ring.size()];
    s += p.lon * q.lat - q.lon * p.lat;
  }
  return 0.5 * s;
}

geo::Ring parse_ring(const json& j, const std::string& pointer) {
  if (!j.is_array()) schema_error(pointer, "expected array of [lon, lat] pairs");
  geo::Ring ring;
  ring.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& pt = j[i];
    const std::string p = pointer + "/" + std::to_string(i);
    if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
      schema_error(p, "expected [lon, lat] number pair");
    }
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  return ring;
}

json ring_json(const geo::Ring& ring) {
  json arr = json::array();
  for (const auto& p : ring) arr.push_back({p.lon, p.lat});
  return arr;
}

}  // namespace

std::vector<ShapefileRecord> parse_shapefile(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kShapefileHeaderBytes) {
    throw Error(ErrorCode::TruncatedFile,
                "shapefile shorter than the 100-byte header (" + std::to_string(bytes.size()) + " bytes)");
  }
  const std::int32_t magic = read_be32(bytes, 0);
  if (magic != 9994) throw Error(ErrorCode::BadMagic, "file code " + std::to_string(magic) + " != 9994");
  const std::int64_t declared = std::int64_t{read_be32(bytes, 24)} * 2;
  if (declared > static_cast<std::int64_t>(bytes.size())) {
    throw Error(ErrorCode::TruncatedFile, "header declares " + std::to_string(declared) +
                                              " bytes but only " + std::to_string(bytes.size()) +
                                              " are present");
  }
  if (declared < static_cast<std::int64_t>(kShapefileHeaderBytes)) {
    throw Error(ErrorCode::CorruptRecord, "declared file length " + std::to_string(declared) +
                                              " is smaller than the header");
  }
  const std::int32_t version = read_le32(bytes, 28);
  if (version != 1000) throw Error(ErrorCode::BadMagic, "version " + std::to_string(version) + " != 1000");
  const std::int32_t file_type = read_le32(bytes, 32);
  if (file_type != kShapePolygon && file_type != kShapeNull) {
    throw Error(ErrorCode::UnsupportedShape, "file shape type " + std::to_string(file_type));
  }

  const auto limit = static_cast<std::size_t>(declared);
  const auto data = bytes.first(limit);
  std::vector<ShapefileRecord> records;
  std::size_t pos = kShapefileHeaderBytes;
  while (pos < limit) {
    if (pos + 8 > limit) throw Error(ErrorCode::TruncatedFile, "record header at byte " + std::to_string(pos));
    const std::int32_t number = read_be32(data, pos);
    const std::int64_t content = std::int64_t{read_be32(data, pos + 4)} * 2;
    if (content < 4) throw Error(ErrorCode::CorruptRecord, "record " + std::to_string(number) + " too short");
    if (static_cast<std::int64_t>(pos + 8) + content > static_cast<std::int64_t>(limit)) {
      throw Error(ErrorCode::TruncatedFile, "record " + std::to_string(number) + " runs past end of file");
    }
    const std::size_t body = pos + 8;
    const auto body_end = body + static_cast<std::size_t>(content);
    pos = body_end;

    const std::int32_t type = read_le32(data, body);
    if (type == kShapeNull) continue;
    if (type != kShapePolygon) {
      throw Error(ErrorCode::UnsupportedShape, "record " + std::to_string(number) + " has shape type " +
                                                   std::to_string(type));
    }
    if (content < 44) throw Error(ErrorCode::CorruptRecord, "polygon record " + std::to_string(number) + " too short");
    ShapefileRecord rec;
    rec.record_number = number;
    rec.shape_type = type;
    for (std::size_t i = 0; i < 4; ++i) rec.bbox[i] = read_le_double(data, body + 4 + 8 * i);
    const std::int32_t num_parts = read_le32(data, body + 36);
    const std::int32_t num_points = read_le32(data, body + 40);
    if (num_parts < 1 || num_points < 1) {
      throw Error(ErrorCode::CorruptRecord, "record " + std::to_string(number) + " has no parts or points");
    }
    const std::int64_t needed = 44 + 4 * std::int64_t{num_parts} + 16 * std::int64_t{num_points};
    if (needed > content) {
      throw Error(ErrorCode::CorruptRecord, "record " + std::to_string(number) + " needs " +
                                                std::to_string(needed) + " bytes, content length is " +
                                                std::to_string(content));
    }
    rec.parts.reserve(static_cast<std::size_t>(num_parts));
    for (std::int32_t i = 0; i < num_parts; ++i) {
      const std::int32_t part = read_le32(data, body + 44 + 4 * static_cast<std::size_t>(i));
      if (part < 0 || part >= num_points || (!rec.parts.empty() && part <= rec.parts.back()) ||
          (rec.parts.empty() && part != 0)) {
        throw Error(ErrorCode::CorruptRecord, "record " + std::to_string(number) + " part offset " +
                                                  std::to_string(part) + " invalid");
      }
      rec.parts.push_back(part);
    }
    const std::size_t pts = body + 44 + 4 * static_cast<std::size_t>(num_parts);
    rec.points.reserve(static_cast<std::size_t>(num_points));
    for (std::int32_t i = 0; i < num_points; ++i) {
      const std::size_t at = pts + 16 * static_cast<std::size_t>(i);
      rec.points.push_back({read_le_double(data, at), read_le_double(data, at + 8)});
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<std::uint8_t> write_shapefile(std::span<const geo::GeoPolygon> polygons) {
  std::vector<std::uint8_t> body;
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  bool first = true;
  int number = 1;
  for (const geo::GeoPolygon& poly : polygons) {
    std::vector<geo::Ring> rings;
    geo::Ring ext(poly.exterior().rbegin(), poly.exterior().rend());  // stored CCW, written CW
    rings.push_back(std::move(ext));
    for (const geo::Ring& h : poly.holes()) rings.emplace_back(h.rbegin(), h.rend());
    for (auto& r : rings) r.push_back(r.front());

    std::vector<std::int32_t> parts;
    std::vector<geo::LonLat> points;
    for (const auto& r : rings) {
      parts.push_back(static_cast<std::int32_t>(points.size()));
      points.insert(points.end(), r.begin(), r.end());
    }
    const geo::BBox b = poly.bbox();
    if (first) {
      xmin = b.min_lon, ymin = b.min_lat, xmax = b.max_lon, ymax = b.max_lat;
      first = false;
    } else {
      xmin = std::min(xmin, b.min_lon), ymin = std::min(ymin, b.min_lat);
      xmax = std::max(xmax, b.max_lon), ymax = std::max(ymax, b.max_lat);
    }
    const auto content = static_cast<std::int32_t>(44 + 4 * parts.size() + 16 * points.size());
    put_be32(body, number++);
    put_be32(body, content / 2);
    put_le32(body, kShapePolygon);
    put_le_double(body, b.min_lon);
    put_le_double(body, b.min_lat);
    put_le_double(body, b.max_lon);
    put_le_double(body, b.max_lat);
    put_le32(body, static_cast<std::int32_t>(parts.size()));
    put_le32(body, static_cast<std::int32_t>(points.size()));
    for (std::int32_t p : parts) put_le32(body, p);
    for (const auto& p : points) {
      put_le_double(body, p.lon);
      put_le_double(body, p.lat);
    }
  }
  std::vector<std::uint8_t> out;
  out.reserve(kShapefileHeaderBytes + body.size());
  put_be32(out, 9994);
  for (int i = 0; i < 5; ++i) put_be32(out, 0);
  put_be32(out, static_cast<std::int32_t>((kShapefileHeaderBytes + body.size()) / 2));
  put_le32(out, 1000);
  put_le32(out, kShapePolygon);
  for (double v : {xmin, ymin, xmax, ymax, 0.0, 0.0, 0.0, 0.0}) put_le_double(out, v);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::vector<geo::GeoPolygon> record_polygons(const ShapefileRecord& record) {
  std::vector<geo::Ring> rings;
  for (std::size_t i = 0; i < record.parts.size(); ++i) {
    const auto begin = static_cast<std::size_t>(record.parts[i]);
    const auto end = i + 1 < record.parts.size() ? static_cast<std::size_t>(record.parts[i + 1])
                                                 : record.points.size();
    rings.emplace_back(record.points.begin() + static_cast<std::ptrdiff_t>(begin),
                       record.points.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (rings.empty()) return {};
  const bool exterior_ccw = signed_area(rings[0]) > 0.0;

  struct Component {
    geo::Ring exterior;
    std::vector<geo::Ring> holes;
  };
  std::vector<Component> comps;
  comps.push_back({rings[0], {}});
  for (std::size_t i = 1; i < rings.size(); ++i) {
    const bool ccw = signed_area(rings[i]) > 0.0;
    if (ccw == exterior_ccw) {
      comps.push_back({rings[i], {}});
      continue;
    }
    std::size_t owner = comps.size() - 1;
    if (!rings[i].empty()) {
      for (std::size_t c = 0; c < comps.size(); ++c) {
        if (geo::point_in_ring(std::span<const geo::LonLat>(comps[c].exterior), rings[i][0])) {
          owner = c;
          break;
        }
      }
    }
    comps[owner].holes.push_back(rings[i]);
  }
  std::vector<geo::GeoPolygon> out;
  out.reserve(comps.size());
  for (auto& c : comps) out.emplace_back(std::move(c.exterior), std::move(c.holes));
  return out;
}

std::vector<SpillObservation> parse_spill_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("/: invalid JSON: ") + e.what());
  }
  check_schema_version(doc);
  const json& id = require(doc, "", "spill_id");
  if (!id.is_string()) schema_error("/spill_id", "expected string");
  const std::string spill_id = id.get<std::string>();
  const json& obs = require(doc, "", "observations");
  if (!obs.is_array()) schema_error("/observations", "expected array");

  std::vector<SpillObservation> out;
  out.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string base = "/observations/" + std::to_string(i);
    const json& o = obs[i];
    const json& ts = require(o, base, "timestamp_utc");
    if (!ts.is_string()) schema_error(base + "/timestamp_utc", "expected ISO-8601 string");
    UtcSeconds t = 0;
    try {
      t = parse_iso8601(ts.get<std::string>());
    } catch (const Error& e) {
      schema_error(base + "/timestamp_utc", e.what());
    }
    geo::Ring exterior = parse_ring(require(o, base, "exterior"), base + "/exterior");
    std::vector<geo::Ring> holes;
    if (auto it = o.find("holes"); it != o.end()) {
      if (!it->is_array()) schema_error(base + "/holes", "expected array of rings");
      for (std::size_t h = 0; h < it->size(); ++h) {
        holes.push_back(parse_ring((*it)[h], base + "/holes/" + std::to_string(h)));
      }
    }
    std::string tag = "json";
    if (auto it = o.find("source_tag"); it != o.end() && it->is_string()) tag = it->get<std::string>();
    try {
      out.push_back(SpillObservation{t, geo::GeoPolygon(std::move(exterior), std::move(holes)), tag, spill_id});
    } catch (const Error& e) {
      throw Error(ErrorCode::GeometryError, base + ": " + e.what());
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SpillObservation& a, const SpillObservation& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].timestamp == out[i - 1].timestamp) {
      schema_error("/observations", "duplicate timestamp " + format_iso8601(out[i].timestamp) +
                                        " for spill " + spill_id);
    }
  }
  return out;
}

std::string write_spill_json(std::string_view spill_id, std::span<const SpillObservation> observations) {
  json doc;
  doc["schema_version"] = "1.0";
  doc["spill_id"] = std::string(spill_id);
  json arr = json::array();
  for (const auto& o : observations) {
    json holes = json::array();
    for (const auto& h : o.boundary.holes()) holes.push_back(ring_json(h));
    arr.push_back({{"timestamp_utc", format_iso8601(o.timestamp)},
                   {"exterior", ring_json(o.boundary.exterior())},
                   {"holes", holes},
                   {"source_tag", o.source_tag}});
  }
  doc["observations"] = std::move(arr);
  return doc.dump(2);
}

std::vector<SpillObservation> load_shapefile_series(const std::filesystem::path& manifest,
                                                    const std::string& spill_id) {
  json doc;
  try {
    doc = json::parse(read_text_file(manifest));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("/: invalid manifest JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("", "manifest must map file names to timestamps");
  std::vector<SpillObservation> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "schema_version") continue;
    if (!it.value().is_string()) schema_error("/" + it.key(), "expected ISO-8601 string");
    const UtcSeconds t = parse_iso8601(it.value().get<std::string>());
    const auto bytes = read_file_bytes(manifest.parent_path() / it.key());
    std::vector<geo::GeoPolygon> comps;
    for (const auto& rec : parse_shapefile(bytes)) {
      for (auto& p : record_polygons(rec)) comps.push_back(std::move(p));
    }
    if (comps.empty()) throw Error(ErrorCode::EmptyInput, it.key() + " has no polygon records");
    out.push_back(SpillObservation{t, geo::largest_component(comps), it.key(), spill_id});
  }
  std::sort(out.begin(), out.end(),
            [](const SpillObservation& a, const SpillObservation& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].timestamp == out[i - 1].timestamp) {
      schema_error("", "duplicate timestamp " + format_iso8601(out[i].timestamp));
    }
  }
  return out;
}

double dms_to_decimal(std::string_view text) {
  const std::string src(text);
  auto fail = [&](const std::string& why) -> double {
    throw Error(ErrorCode::ParseError, "'" + src + "': " + why);
  };
  std::size_t pos = 0;
  auto skip_spaces = [&] {
    while (pos < text.size() && text[pos] == ' ') ++pos;
  };
  auto number = [&]() -> double {
    const std::size_t start = pos;
    while (pos < text.size() && ((text[pos] >= '0' && text[pos] <= '9') || text[pos] == '.')) ++pos;
    if (pos == start) fail("expected number at offset " + std::to_string(start));
    try {
      std::size_t used = 0;
      const std::string tok(text.substr(start, pos - start));
      const double v = std::stod(tok, &used);
      if (used != tok.size()) fail("bad number '" + tok + "'");
      return v;
    } catch (const std::logic_error&) {
      return fail("bad number");
    }
  };
  auto symbol = [&](std::initializer_list<std::string_view> options) {
    for (std::string_view s : options) {
      if (text.substr(pos, s.size()) == s) {
        pos += s.size();
        return;
      }
    }
    fail("unexpected character at offset " + std::to_string(pos));
  };

  skip_spaces();
  const double d = number();
  symbol({"\xC2\xB0", "d", "D"});
  skip_spaces();
  const double m = number();
  symbol({"'", "\xE2\x80\xB2"});
  skip_spaces();
  const double s = number();
  symbol({"\"", "''", "\xE2\x80\xB3"});
  skip_spaces();
  if (pos >= text.size()) fail("missing hemisphere");
  const char h = text[pos++];
  skip_spaces();
  if (pos != text.size()) fail("trailing characters");
  if (!(m >= 0.0 && m < 60.0)) fail("minutes out of range");
  if (!(s >= 0.0 && s < 60.0)) fail("seconds out of range");
  double limit = 0.0, sign = 1.0;
  switch (h) {
    case 'N': limit = 90.0; break;
    case 'S': limit = 90.0; sign = -1.0; break;
    case 'E': limit = 180.0; break;
    case 'W': limit = 180.0; sign = -1.0; break;
    default: fail(std::string("hemisphere must be N, S, E or W, got '") + h + "'");
  }
  const double value = d + m / 60.0 + s / 3600.0;
  if (value > limit) fail("degrees out of range");
  return sign * value;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace spillnet::ingest
