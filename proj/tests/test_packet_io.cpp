#include <gtest/gtest.h>

#include <clocale>
#include <filesystem>
#include <fstream>

#include "minav/packet_io.hpp"
#include "test_support.hpp"

namespace minav {
namespace {

std::string schema_message(const std::string& text) {
  try {
    parse_packet_json(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

const char* kMinimal = R"({"v": 1, "c": 2.0, "sigma": 0.5,
  "moments": [[1,0,0],[0,1,0],[0,0,1]],
  "readings": [[0.1,0.2,0.3],[0.4,0.5,0.6],[0.7,0.8,0.9]]})";

TEST(PacketJson, ParsesMinimalPacket) {
  const MeasurementPacket p = parse_packet_json(kMinimal);
  EXPECT_EQ(p.c, 2.0);
  EXPECT_EQ(p.noise_cov, Matrix3d(0.25 * Matrix3d::Identity()));
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.readings[1], Vector3d(0.4, 0.5, 0.6));
  EXPECT_FALSE(p.gyro_deltas);
  EXPECT_FALSE(p.accel);
}

TEST(PacketJson, RoundTrip) {
  MeasurementPacket p = test::default_packet(91);
  std::vector<EulerAnglesd> deltas(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) deltas[k] = {0.01 * k, 0.0, -0.02 * k};
  p.gyro_deltas = deltas;
  p.accel = Vec3List{Vector3d(0.01, -0.02, 9.8)};
  const std::string text = packet_to_json(p);
  const MeasurementPacket q = parse_packet_json(text);
  EXPECT_EQ(q.readings, p.readings);
  EXPECT_EQ(q.schedule.moments, p.schedule.moments);
  EXPECT_EQ(q.noise_cov, p.noise_cov);
  EXPECT_EQ(q.accel, p.accel);
  ASSERT_TRUE(q.gyro_deltas);
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_EQ((*q.gyro_deltas)[k].vector(), deltas[k].vector());
  }
  EXPECT_EQ(packet_to_json(q), text);

  p.noise_cov(0, 1) = p.noise_cov(1, 0) = 0.001;
  EXPECT_EQ(parse_packet_json(packet_to_json(p)).noise_cov, p.noise_cov);
}

TEST(PacketJson, SchemaErrorsNameTheField) {
  EXPECT_NE(schema_message(R"({"v": 1, "c": 1, "sigma": 0.1, "moments": [[1,0,0],[0,1,0]],
      "readings": [[1,2,3]]})").find("'readings'"), std::string::npos);
  EXPECT_NE(schema_message(R"({"c": 1})").find("'v'"), std::string::npos);
  EXPECT_NE(schema_message(R"({"v": 2, "c": 1})").find("'v'"), std::string::npos);
  EXPECT_NE(schema_message(R"({"v": 1, "sigma": 0.1})").find("'c'"), std::string::npos);
  EXPECT_NE(schema_message(R"({"v": 1, "c": 1, "moments": [[1,0,0]], "readings": [[1,2,3]]})")
                .find("sigma"),
            std::string::npos);
  EXPECT_NE(schema_message(R"({"v": 1, "c": 1, "sigma": 0.1, "noise_cov": [1,0,0,0,1,0,0,0,1],
      "moments": [[1,0,0]], "readings": [[1,2,3]]})").find("exactly one"), std::string::npos);
  EXPECT_NE(schema_message(R"({"v": 1, "c": 1, "noise_cov": [1,0,0,0,-1,0,0,0,1],
      "moments": [[1,0,0]], "readings": [[1,2,3]]})").find("'noise_cov'"), std::string::npos);
  EXPECT_NE(schema_message(R"({"v": 1, "c": 1, "sigma": 0.1, "moments": [[1,0]],
      "readings": [[1,2,3]]})").find("'moments'"), std::string::npos);
  EXPECT_NE(schema_message(R"({"v": 1, "c": 1, "sigma": 0.1, "moments": [[0,0,0]],
      "readings": [[1,2,3]]})").find("'moments'"), std::string::npos);
  EXPECT_NE(schema_message(R"({"v": 1, "c": 1, "sigma": 0.1, "moments": [[1,0,0]],
      "readings": [[1,"x",3]]})").find("'readings'"), std::string::npos);
  EXPECT_NE(schema_message(R"({"v": 1, "c": 1, "sigma": 0.1, "moments": [[1,0,0]],
      "readings": [[1,2,3]], "gyro_deltas": []})").find("'gyro_deltas'"), std::string::npos);
}

TEST(PacketJson, SyntaxErrorsReportLineAndColumn) {
  const std::string msg = schema_message("{\n  \"v\": 1,\n  \"c\": ,\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(PacketJson, MissingFile) {
  EXPECT_THROW(load_packet("/nonexistent/packet.json"), Error);
}

TEST(FormatNumber, NineSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_number(1111.1111111111), "1111.11111");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-2.5e-12), "-2.5e-12");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-1.0 / 0.0), "-inf");
}

TEST(FormatNumber, IgnoresLocale) {
  const char* old = std::setlocale(LC_ALL, nullptr);
  const std::string saved = old ? old : "C";
  if (std::setlocale(LC_ALL, "de_DE.UTF-8")) {
    EXPECT_EQ(format_number(0.5), "0.5");
  }
  std::setlocale(LC_ALL, saved.c_str());
}

TEST(CsvTable, QuotesAndLineEndings) {
  CsvTable t({"a", "b"});
  t.add_row({"1", "x,y"});
  t.add_row({"say \"hi\"", "2"});
  EXPECT_EQ(t.str(), "a,b\n1,\"x,y\"\n\"say \"\"hi\"\"\",2\n");
}

TEST(WriteFileAtomically, ReplacesContentWithoutLeftovers) {
  const auto dir = std::filesystem::temp_directory_path() / "minav_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.csv";
  write_file_atomically(path, "one\n");
  write_file_atomically(path, "two\n");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(content, "two\n");
  EXPECT_FALSE(std::filesystem::exists(dir / "out.csv.tmp"));
  std::filesystem::remove_all(dir);
}

TEST(ParseAngle, DegreeSuffix) {
  EXPECT_DOUBLE_EQ(parse_angle("0.5"), 0.5);
  EXPECT_NEAR(parse_angle("180deg"), 3.14159265358979, 1e-14);
  EXPECT_THROW(parse_angle("deg"), std::invalid_argument);
  EXPECT_THROW(parse_angle("1.0rad"), std::invalid_argument);
  EXPECT_EQ(parse_number_list("1,2.5,-3"), (std::vector<double>{1, 2.5, -3}));
  EXPECT_THROW(parse_number_list("1,,2"), std::invalid_argument);
  EXPECT_THROW(parse_number_list("1,2deg"), std::invalid_argument);
  EXPECT_NEAR(parse_number_list("1,90deg", true)[1], 1.5707963267949, 1e-12);
}

}  // namespace
}  // namespace minav
