#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "franson/franson.h"

namespace {

using nlohmann::json;

struct Config {
    franson_config* handle = franson_config_create();
    ~Config() { franson_config_destroy(handle); }
    franson_config* operator*() const { return handle; }
};

struct Json {
    char* text = nullptr;
    ~Json() { franson_string_free(text); }
    json parse() const { return json::parse(std::string(text)); }
};

std::filesystem::path temp_dir(const std::string& leaf) {
    const auto dir = std::filesystem::temp_directory_path() / "franson_c_api_test" / leaf;
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void set(const Config& cfg, const char* key, const char* value) {
    REQUIRE(franson_config_set(*cfg, key, value) == FRANSON_OK);
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(franson_version()).find('.') != std::string::npos);
    CHECK(std::string(franson_status_name(FRANSON_OK)) == "ok");
    CHECK(std::string(franson_status_name(FRANSON_ERROR_REGIME)) == "regime violation");
}

TEST_CASE("config handle set/get/hash and error text") {
    Config cfg;
    REQUIRE(*cfg != nullptr);

    char buf[128];
    REQUIRE(franson_config_get(*cfg, "delta_l_mm", buf, sizeof(buf)) == FRANSON_OK);
    CHECK(std::string(buf) == "30");

    set(cfg, "delta_l_mm", "42.5");
    REQUIRE(franson_config_get(*cfg, "delta_l_mm", buf, sizeof(buf)) == FRANSON_OK);
    CHECK(std::string(buf) == "42.5");

    CHECK(franson_config_set(*cfg, "bogus_key", "1") == FRANSON_ERROR_INVALID_ARGUMENT);
    CHECK(std::string(franson_last_error()).find("bogus_key") != std::string::npos);
    CHECK(franson_config_set(*cfg, "delta_f_thz", "not-a-number") ==
          FRANSON_ERROR_INVALID_ARGUMENT);
    CHECK(std::string(franson_last_error()).find("delta_f_thz") != std::string::npos);

    char tiny[4];
    CHECK(franson_config_hash(*cfg, tiny, sizeof(tiny)) == FRANSON_ERROR_INVALID_ARGUMENT);
    char hash1[32], hash2[32];
    REQUIRE(franson_config_hash(*cfg, hash1, sizeof(hash1)) == FRANSON_OK);
    CHECK(std::strlen(hash1) == 16);
    set(cfg, "seed", "77");
    REQUIRE(franson_config_hash(*cfg, hash2, sizeof(hash2)) == FRANSON_OK);
    CHECK(std::string(hash1) != std::string(hash2));
}

TEST_CASE("key table lists every key with type and default") {
    const std::string table = franson_config_keys();
    CHECK(table.find("delta_f_thz\tfloat\t1\t") != std::string::npos);
    CHECK(table.find("scan_variable\tstring\tphi_a\t") != std::string::npos);
    CHECK(table.find("window_half_width_ps\tint\t25\t") != std::string::npos);
}

TEST_CASE("config file save/load through the C surface") {
    const auto dir = temp_dir("config");
    const std::string path = (dir / "c.json").string();
    Config cfg;
    set(cfg, "pump_linewidth_ghz", "3.5");
    REQUIRE(franson_config_save(*cfg, path.c_str()) == FRANSON_OK);
    Config back;
    REQUIRE(franson_config_load(*back, path.c_str()) == FRANSON_OK);
    char buf[64];
    REQUIRE(franson_config_get(*back, "pump_linewidth_ghz", buf, sizeof(buf)) == FRANSON_OK);
    CHECK(std::string(buf) == "3.5");

    CHECK(franson_config_load(*back, (dir / "missing.json").string().c_str()) ==
          FRANSON_ERROR_IO);
}

TEST_CASE("validate reports the stock regime") {
    Config cfg;
    Json out;
    REQUIRE(franson_run_validate(*cfg, &out.text) == FRANSON_OK);
    const json j = out.parse();
    CHECK(j["decoherence_ok"].get<bool>());
    CHECK(j["coherence_ok"].get<bool>());
    CHECK(j["event_mode_allowed"].get<bool>());
    CHECK(j["tau_ps"].get<double>() == doctest::Approx(100.069229).epsilon(1e-6));
}

TEST_CASE("a narrowband source is a regime error for simulate") {
    Config cfg;
    set(cfg, "delta_f_thz", "0.001");
    set(cfg, "n_pairs", "100");
    Json out;
    CHECK(franson_run_simulate(*cfg, temp_dir("regime").string().c_str(), &out.text) ==
          FRANSON_ERROR_REGIME);
    CHECK(std::string(franson_last_error()).find("event mode") != std::string::npos);
}

TEST_CASE("simulate is byte-deterministic and coincide consumes its files") {
    Config cfg;
    set(cfg, "n_pairs", "20000");
    set(cfg, "seed", "5");

    const auto dir1 = temp_dir("sim1");
    const auto dir2 = temp_dir("sim2");
    Json m1, m2;
    REQUIRE(franson_run_simulate(*cfg, dir1.string().c_str(), &m1.text) == FRANSON_OK);
    REQUIRE(franson_run_simulate(*cfg, dir2.string().c_str(), &m2.text) == FRANSON_OK);

    std::vector<std::string> paths1, paths2;
    for (const auto& f : m1.parse()["files"]) paths1.push_back(f["path"].get<std::string>());
    for (const auto& f : m2.parse()["files"]) paths2.push_back(f["path"].get<std::string>());
    REQUIRE(paths1.size() == 4);
    for (int c = 0; c < 4; ++c) CHECK(slurp(paths1[c]) == slurp(paths2[c]));

    const char* cpaths[4] = {paths1[0].c_str(), paths1[1].c_str(), paths1[2].c_str(),
                             paths1[3].c_str()};
    const std::string hist = (dir1 / "hist.csv").string();
    Json counts;
    REQUIRE(franson_run_coincide(*cfg, cpaths, hist.c_str(), &counts.text) == FRANSON_OK);
    const json j = counts.parse();
    CHECK(j["input_hash"] == j["config_hash"]);
    std::uint64_t singles = 0;
    for (int c = 1; c <= 4; ++c) singles += j["singles"]["ch" + std::to_string(c)].get<std::uint64_t>();
    CHECK(singles == 2 * 20000);
    CHECK(slurp(hist).rfind("# config_hash=", 0) == 0);

    CHECK(franson_run_coincide(*cfg, cpaths, nullptr, &counts.text) == FRANSON_OK);
    const std::string missing = (dir1 / "nope.csv").string();
    const char* bad[4] = {paths1[0].c_str(), paths1[1].c_str(), paths1[2].c_str(),
                          missing.c_str()};
    Json unused;
    CHECK(franson_run_coincide(*cfg, bad, nullptr, &unused.text) == FRANSON_ERROR_IO);
}

TEST_CASE("chsh runs the full pipeline at a desk scale") {
    Config cfg;
    set(cfg, "n_pairs", "40000");
    set(cfg, "pump_linewidth_ghz", "0");
    Json out;
    REQUIRE(franson_run_chsh(*cfg, &out.text) == FRANSON_OK);
    const json j = out.parse();
    CHECK(j["s"].get<double>() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.03));
    CHECK(j["violates_classical_bound"].get<bool>());
    CHECK(j["terms"].size() == 4);
}

TEST_CASE("compare passes on a self-consistent configuration") {
    Config cfg;
    set(cfg, "n_pairs", "50000");
    Json out;
    REQUIRE(franson_run_compare(*cfg, nullptr, &out.text) == FRANSON_OK);
    const json j = out.parse();
    CHECK_FALSE(j["any_flagged"].get<bool>());
    bool saw_factorized = false, saw_paired = false, saw_gap = false;
    for (const auto& row : j["rows"]) {
        const std::string name = row["name"].get<std::string>();
        saw_factorized = saw_factorized || name == "ungated_factorized_14";
        saw_paired = saw_paired || name == "ungated_paired_14";
        saw_gap = saw_gap || name == "ungated_estimator_gap_14";
    }
    CHECK(saw_factorized);
    CHECK(saw_paired);
    CHECK(saw_gap);
}

TEST_CASE("raw-array matcher and histogram helpers") {
    const std::vector<int64_t> a = {100, 210, 305, 420};
    const std::vector<int64_t> b = {98, 205, 300, 800};
    uint64_t count = 0;
    REQUIRE(franson_match_coincidences(a.data(), a.size(), b.data(), b.size(), 0, 6, &count) ==
            FRANSON_OK);
    CHECK(count == 3);
    REQUIRE(franson_match_coincidences(a.data(), a.size(), b.data(), b.size(), 0, 0, &count) ==
            FRANSON_ERROR_INVALID_ARGUMENT);

    uint64_t bins[512];
    size_t nbins = 0;
    REQUIRE(franson_delay_histogram(a.data(), a.size(), b.data(), b.size(), 2, 20, bins, 512,
                                    &nbins) == FRANSON_OK);
    CHECK(nbins == 20);
    uint64_t total = 0;
    for (size_t i = 0; i < nbins; ++i) total += bins[i];
    CHECK(total == 3);

    REQUIRE(franson_delay_histogram(a.data(), a.size(), b.data(), b.size(), 2, 2000, bins, 4,
                                    &nbins) == FRANSON_ERROR_INVALID_ARGUMENT);
}
