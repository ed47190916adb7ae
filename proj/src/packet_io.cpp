#include "minav/packet_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace minav {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::SchemaError, what);
}

double number_field(const json& doc, const char* name) {
  const auto it = doc.find(name);
  if (it == doc.end()) schema_error(std::string("missing field '") + name + "'");
  if (!it->is_number()) schema_error(std::string("field '") + name + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) schema_error(std::string("field '") + name + "' must be finite");
  return v;
}

Vec3List vector_list(const json& value, const std::string& name) {
  if (!value.is_array()) schema_error("field '" + name + "' must be an array of [x,y,z]");
  Vec3List out;
  out.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    const json& item = value[i];
    const std::string where = "field '" + name + "' entry " + std::to_string(i);
    if (!item.is_array() || item.size() != 3) schema_error(where + " must be [x,y,z]");
    Vector3d v;
    for (int j = 0; j < 3; ++j) {
      if (!item[j].is_number()) schema_error(where + " must contain numbers");
      v(j) = item[j].get<double>();
      if (!std::isfinite(v(j))) schema_error(where + " must be finite");
    }
    out.push_back(v);
  }
  return out;
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::string number_json(double v) { return json(v).dump(); }

// One [x, y, z] triple per line keeps packet files diffable.
std::string vector_array(const Vec3List& list) {
  if (list.empty()) return "[]";
  std::string out = "[\n";
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& v = list[i];
    out += "    [" + number_json(v.x()) + ", " + number_json(v.y()) + ", " + number_json(v.z()) + "]";
    out += i + 1 < list.size() ? ",\n" : "\n";
  }
  return out + "  ]";
}

}  // namespace

MeasurementPacket parse_packet_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    schema_error("JSON syntax error at line " + std::to_string(line) + ", column " +
                 std::to_string(column));
  }
  if (!doc.is_object()) schema_error("document must be a JSON object");

  const auto version = doc.find("v");
  if (version == doc.end()) schema_error("missing field 'v'");
  if (!version->is_number_integer() || version->get<int>() != 1) {
    schema_error("field 'v' must be 1");
  }

  MeasurementPacket packet;
  packet.c = number_field(doc, "c");

  const bool has_sigma = doc.contains("sigma");
  const bool has_cov = doc.contains("noise_cov");
  if (has_sigma == has_cov) schema_error("exactly one of 'sigma' and 'noise_cov' is required");
  if (has_sigma) {
    const double sigma = number_field(doc, "sigma");
    if (!(sigma > 0.0)) schema_error("field 'sigma' must be positive");
    packet.noise_cov = sigma * sigma * Matrix3d::Identity();
  } else {
    const json& cov = doc["noise_cov"];
    if (!cov.is_array() || cov.size() != 9) {
      schema_error("field 'noise_cov' must be an array of 9 numbers (row-major)");
    }
    for (int i = 0; i < 9; ++i) {
      if (!cov[i].is_number()) schema_error("field 'noise_cov' must contain numbers");
      packet.noise_cov(i / 3, i % 3) = cov[i].get<double>();
    }
    if (!packet.noise_cov.allFinite() ||
        !packet.noise_cov.isApprox(packet.noise_cov.transpose()) ||
        Eigen::LLT<Matrix3d>(packet.noise_cov).info() != Eigen::Success) {
      schema_error("field 'noise_cov' must be symmetric positive definite");
    }
  }

  if (!doc.contains("moments")) schema_error("missing field 'moments'");
  if (!doc.contains("readings")) schema_error("missing field 'readings'");
  packet.schedule.moments = vector_list(doc["moments"], "moments");
  packet.readings = vector_list(doc["readings"], "readings");
  if (packet.readings.size() != packet.schedule.size()) {
    schema_error("field 'readings' has " + std::to_string(packet.readings.size()) +
                 " entries but 'moments' has " + std::to_string(packet.schedule.size()));
  }
  if (packet.readings.empty()) schema_error("field 'readings' must not be empty");
  for (std::size_t i = 0; i < packet.schedule.size(); ++i) {
    if (packet.schedule.moments[i].isZero(0.0)) {
      schema_error("field 'moments' entry " + std::to_string(i) + " must be nonzero");
    }
  }

  if (doc.contains("gyro_deltas")) {
    const Vec3List deltas = vector_list(doc["gyro_deltas"], "gyro_deltas");
    if (deltas.size() != packet.readings.size()) {
      schema_error("field 'gyro_deltas' must have one entry per reading");
    }
    std::vector<EulerAnglesd> angles;
    for (const auto& d : deltas) angles.push_back(EulerAnglesd::from_vector(d));
    packet.gyro_deltas = std::move(angles);
  }
  if (doc.contains("accel")) packet.accel = vector_list(doc["accel"], "accel");
  return packet;
}

MeasurementPacket load_packet(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) schema_error("cannot read packet file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_packet_json(buffer.str());
}

std::string packet_to_json(const MeasurementPacket& packet) {
  std::vector<std::pair<std::string, std::string>> fields;
  fields.emplace_back("v", "1");
  fields.emplace_back("c", number_json(packet.c));
  const double s2 = packet.noise_cov(0, 0);
  const double sigma = std::sqrt(s2);
  // "sigma" only when it reproduces the covariance bit for bit.
  if (packet.noise_cov == Matrix3d(s2 * Matrix3d::Identity()) && s2 > 0.0 &&
      sigma * sigma == s2) {
    fields.emplace_back("sigma", number_json(sigma));
  } else {
    std::string cov = "[";
    for (int i = 0; i < 9; ++i) cov += (i ? ", " : "") + number_json(packet.noise_cov(i / 3, i % 3));
    fields.emplace_back("noise_cov", cov + "]");
  }
  fields.emplace_back("moments", vector_array(packet.schedule.moments));
  fields.emplace_back("readings", vector_array(packet.readings));
  if (packet.gyro_deltas) {
    Vec3List deltas;
    for (const auto& d : *packet.gyro_deltas) deltas.push_back(d.vector());
    fields.emplace_back("gyro_deltas", vector_array(deltas));
  }
  if (packet.accel) fields.emplace_back("accel", vector_array(*packet.accel));

  std::string out = "{\n";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    out += "  \"" + fields[i].first + "\": " + fields[i].second;
    out += i + 1 < fields.size() ? ",\n" : "\n";
  }
  return out + "}\n";
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

std::string CsvTable::str() const {
  auto quote = [](const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  };
  auto line = [&](const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += quote(fields[i]);
    }
    return out + "\n";
  };
  std::string out = line(header_);
  for (const auto& row : rows_) out += line(row);
  return out;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

double parse_angle(std::string_view text) {
  bool degrees = false;
  if (text.size() > 3 && text.substr(text.size() - 3) == "deg") {
    degrees = true;
    text.remove_suffix(3);
  }
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return degrees ? value * std::numbers::pi / 180.0 : value;
}

std::vector<double> parse_number_list(std::string_view text, bool angles) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    if (angles) {
      out.push_back(parse_angle(item));
    } else {
      double v = 0.0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
        throw std::invalid_argument("not a number: '" + std::string(item) + "'");
      }
      out.push_back(v);
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace minav
