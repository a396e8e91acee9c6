#include <doctest.h>

#include <charconv>
#include <set>

#include "convert.hpp"
#include "topicmap/error.hpp"
#include "topicmap/rng.hpp"
#include "topicmap/util.hpp"

using namespace topicmap;

TEST_CASE("sha256 matches the published test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("format_double round-trips and stays short") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e21, 0.0, 123456789.125}) {
    const auto text = format_double(v);
    double back = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_fixed(0.125, 2) == "0.12");
  CHECK(format_fixed(1.0, 2) == "1.00");
}

TEST_CASE("csv_escape quotes only when needed") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("file helpers report missing input and round-trip bytes") {
  const auto dir = testing::scratch_dir("util");
  const std::string bytes("a\0b\xff", 4);
  write_file(dir / "f.bin", bytes);
  CHECK(read_file(dir / "f.bin") == bytes);
  CHECK(sha256_file(dir / "f.bin") == sha256_hex(bytes));
  try {
    read_file(dir / "nope");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_input);
  }
}

TEST_CASE("error kinds map to distinct exit codes") {
  std::set<int> codes;
  for (auto kind : {ErrorKind::invalid_argument, ErrorKind::missing_input, ErrorKind::format, ErrorKind::provenance,
                    ErrorKind::io}) {
    codes.insert(exit_code(kind));
    CHECK(exit_code(kind) > 1);
    CHECK(!to_string(kind).empty());
  }
  CHECK(codes.size() == 5);
  CHECK(exit_code(ErrorKind::invalid_argument) == 2);
  CHECK(exit_code(ErrorKind::provenance) == 5);
}

TEST_CASE("counter rng is a pure function of seed, stream and counter") {
  const CounterRng a(42);
  const CounterRng b(42);
  for (std::uint64_t c = 0; c < 100; ++c) {
    CHECK(a.bits(c) == b.bits(c));
    const double u = a.uniform(c);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(a.below(c, 7) < 7);
  }
  CHECK(a.bits(3) != CounterRng(43).bits(3));
  CHECK(a.substream(1).bits(0) != a.substream(2).bits(0));
  CHECK(a.substream(5).bits(9) == CounterRng(42).substream(5).bits(9));

  RngStream s(a);
  CHECK(s.bits() == a.bits(0));
  CHECK(s.bits() == a.bits(1));
}

TEST_CASE("counter rng draws have sensible moments") {
  const CounterRng rng(7);
  double sum = 0.0;
  double sq = 0.0;
  double usum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal(static_cast<std::uint64_t>(i));
    sum += z;
    sq += z * z;
    usum += rng.uniform(static_cast<std::uint64_t>(i) + 1'000'000);
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
  CHECK(std::abs(usum / n - 0.5) < 0.01);
}
