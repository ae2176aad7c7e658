#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "franson/config.hpp"
#include "franson/error.hpp"
#include "franson/rng.hpp"
#include "franson/tag_io.hpp"

using namespace franson;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "franson_config_io_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("config set/get round trips every key") {
    ExperimentConfig cfg;
    for (const auto& spec : ExperimentConfig::keys()) {
        const std::string value = cfg.get(spec.name);
        ExperimentConfig other;
        other.set(spec.name, value);
        CHECK(other.get(spec.name) == value);
    }
    CHECK_THROWS_AS(cfg.set("no_such_key", "1"), Error);
    CHECK_THROWS_AS(cfg.get("no_such_key"), Error);
    CHECK_THROWS_AS(cfg.set("delta_f_thz", "abc"), Error);
    CHECK_THROWS_AS(cfg.set("n_pairs", "-3"), Error);
    CHECK_THROWS_AS(cfg.set("n_pairs", "1.5"), Error);
}

TEST_CASE("JSON round trip preserves the canonical form") {
    ExperimentConfig cfg;
    cfg.set("delta_f_thz", "0.74");
    cfg.set("phi_a_rad", format_double(0.1234567890123456789));
    cfg.set("seed", "18446744073709551615"); // u64 max survives
    cfg.set("scan_variable", "joint");
    const ExperimentConfig back = ExperimentConfig::from_json_string(cfg.to_json_string());
    CHECK(back.canonical_string() == cfg.canonical_string());
    CHECK(back.hash() == cfg.hash());
    CHECK(back.seed == cfg.seed);
}

TEST_CASE("config files load and save") {
    const auto dir = temp_dir();
    const auto path = (dir / "config.json").string();
    ExperimentConfig cfg;
    cfg.set("pump_linewidth_ghz", "2.5");
    cfg.save_file(path);
    const ExperimentConfig back = ExperimentConfig::load_file(path);
    CHECK(back.hash() == cfg.hash());
    CHECK(back.source.pump_linewidth_ghz == 2.5);

    CHECK_THROWS_AS(ExperimentConfig::load_file((dir / "missing.json").string()), Error);
    std::ofstream bad(dir / "bad.json");
    bad << "not json";
    bad.close();
    CHECK_THROWS_AS(ExperimentConfig::load_file((dir / "bad.json").string()), Error);
}

TEST_CASE("hash identifies the experiment, not the disk layout") {
    ExperimentConfig cfg;
    const std::string base = cfg.hash();
    cfg.out_dir = "elsewhere";
    cfg.tag_format = "bin";
    CHECK(cfg.hash() == base);
    cfg.seed = 2;
    CHECK(cfg.hash() != base);
    cfg.seed = 1;
    CHECK(cfg.hash() == base);
    cfg.set("phi_b_rad", "0.25");
    CHECK(cfg.hash() != base);
}

TEST_CASE("validation names the offending field") {
    ExperimentConfig cfg;
    cfg.scan_variable = "sideways";
    try {
        cfg.validate();
        FAIL("expected validation to throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("scan_variable") != std::string::npos);
    }
    cfg.scan_variable = "phi_a";
    cfg.tag_format = "xml";
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.tag_format = "csv";
    cfg.delta_l_mm = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("tag files round trip in both formats") {
    const auto dir = temp_dir();
    rng::Stream s(9);
    TimeTagStream stream;
    stream.channel = 3;
    stream.origin.seed = 424242;
    stream.origin.config_hash = "00f1e2d3c4b5a697";
    std::int64_t t = 0;
    for (int k = 0; k < 5000; ++k) {
        t += 1 + static_cast<std::int64_t>(s.uniform() * 1000.0);
        stream.tags_ps.push_back(t);
    }

    const auto csv_path = (dir / "tags.csv").string();
    tag_io::write_csv(csv_path, stream);
    const TimeTagStream from_csv = tag_io::read_file(csv_path);
    CHECK(from_csv.channel == stream.channel);
    CHECK(from_csv.tags_ps == stream.tags_ps);
    CHECK(from_csv.origin.seed == stream.origin.seed);
    CHECK(from_csv.origin.config_hash == stream.origin.config_hash);

    const auto bin_path = (dir / "tags.bin").string();
    tag_io::write_binary(bin_path, stream);
    const TimeTagStream from_bin = tag_io::read_file(bin_path);
    CHECK(from_bin.channel == stream.channel);
    CHECK(from_bin.tags_ps == stream.tags_ps);
    CHECK(from_bin.origin.seed == stream.origin.seed);
    CHECK(from_bin.origin.config_hash == stream.origin.config_hash);
}

TEST_CASE("binary layout is pinned byte for byte") {
    const auto dir = temp_dir();
    TimeTagStream stream;
    stream.channel = 2;
    stream.origin.seed = 0x0102030405060708ULL;
    stream.origin.config_hash = "00000000000000ff";
    stream.tags_ps = {0x1122334455667788LL};
    const auto path = (dir / "layout.bin").string();
    tag_io::write_binary(path, stream);
    const std::string bytes = slurp(path);
    REQUIRE(bytes.size() == 48);
    CHECK(bytes.substr(0, 8) == "FRTAG001");
    // u64 hash, little endian
    CHECK(static_cast<unsigned char>(bytes[8]) == 0xff);
    for (int i = 9; i < 16; ++i) CHECK(bytes[i] == 0);
    // u64 seed, little endian
    CHECK(static_cast<unsigned char>(bytes[16]) == 0x08);
    CHECK(static_cast<unsigned char>(bytes[23]) == 0x01);
    // record count
    CHECK(static_cast<unsigned char>(bytes[24]) == 1);
    // record: u64 time little endian, u8 channel, 7 zero pad bytes
    CHECK(static_cast<unsigned char>(bytes[32]) == 0x88);
    CHECK(static_cast<unsigned char>(bytes[39]) == 0x11);
    CHECK(static_cast<unsigned char>(bytes[40]) == 2);
    for (int i = 41; i < 48; ++i) CHECK(bytes[i] == 0);
}

TEST_CASE("csv header and metadata line are pinned") {
    const auto dir = temp_dir();
    TimeTagStream stream;
    stream.channel = 1;
    stream.origin.seed = 7;
    stream.origin.config_hash = "0123456789abcdef";
    stream.tags_ps = {10, 25};
    const auto path = (dir / "pinned.csv").string();
    tag_io::write_csv(path, stream);
    CHECK(slurp(path) == "# config_hash=0123456789abcdef seed=7\nchannel,time_ps\n1,10\n1,25\n");
}

TEST_CASE("named substreams are independent and stable") {
    const std::uint64_t master = 1234;
    CHECK(rng::derive_seed(master, "pairs", 0) != rng::derive_seed(master, "outcomes", 0));
    CHECK(rng::derive_seed(master, "pairs", 0) != rng::derive_seed(master, "pairs", 1));
    CHECK(rng::derive_seed(master, "pairs", 0) == rng::derive_seed(master, "pairs", 0));

    rng::Stream a(rng::derive_seed(master, "pairs", 0));
    rng::Stream b(rng::derive_seed(master, "pairs", 0));
    for (int k = 0; k < 1000; ++k) CHECK(a.bits() == b.bits());
}

TEST_CASE("format_double writes shortest round-trip decimals") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-199.0) == "-199");
    CHECK(format_double(1e21) == "1e+21");
    const double tricky = 0.1 + 0.2;
    CHECK(std::stod(format_double(tricky)) == tricky);
}
