#include "franson/franson.h"

#include <cstring>
#include <new>
#include <string>

#include "franson/config.hpp"
#include "franson/error.hpp"
#include "franson/pipeline.hpp"

using franson::ErrorCode;
using franson::ExperimentConfig;

struct franson_config {
    ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

franson_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument:
            return FRANSON_ERROR_INVALID_ARGUMENT;
        case ErrorCode::regime_violation:
            return FRANSON_ERROR_REGIME;
        case ErrorCode::io_error:
            return FRANSON_ERROR_IO;
        case ErrorCode::internal:
            return FRANSON_ERROR_INTERNAL;
    }
    return FRANSON_ERROR_INTERNAL;
}

// Runs fn, translating exceptions into status codes + last-error text.
template <typename Fn>
franson_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        fn();
        return FRANSON_OK;
    } catch (const franson::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return FRANSON_ERROR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FRANSON_ERROR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return FRANSON_ERROR_INTERNAL;
    }
}

franson_status fail_invalid(const char* msg) {
    g_last_error = msg;
    return FRANSON_ERROR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

franson_status copy_to_buffer(const std::string& s, char* buffer, size_t size) {
    if (buffer == nullptr) return fail_invalid("output buffer is null");
    if (s.size() + 1 > size) {
        g_last_error = "output buffer too small (need " + std::to_string(s.size() + 1) +
                       " bytes)";
        return FRANSON_ERROR_INVALID_ARGUMENT;
    }
    std::memcpy(buffer, s.c_str(), s.size() + 1);
    return FRANSON_OK;
}

} // namespace

extern "C" {

const char* franson_version(void) { return "1.0.0"; }

const char* franson_status_name(franson_status status) {
    switch (status) {
        case FRANSON_OK:
            return "ok";
        case FRANSON_ERROR_INVALID_ARGUMENT:
            return "invalid argument";
        case FRANSON_ERROR_REGIME:
            return "regime violation";
        case FRANSON_ERROR_IO:
            return "io error";
        case FRANSON_ERROR_INTERNAL:
            return "internal error";
    }
    return "unknown status";
}

const char* franson_last_error(void) { return g_last_error.c_str(); }

franson_config* franson_config_create(void) { return new (std::nothrow) franson_config{}; }

void franson_config_destroy(franson_config* cfg) { delete cfg; }

franson_status franson_config_load(franson_config* cfg, const char* path) {
    if (cfg == nullptr || path == nullptr) return fail_invalid("config handle or path is null");
    return guarded([&] { cfg->cfg = ExperimentConfig::load_file(path); });
}

franson_status franson_config_save(const franson_config* cfg, const char* path) {
    if (cfg == nullptr || path == nullptr) return fail_invalid("config handle or path is null");
    return guarded([&] { cfg->cfg.save_file(path); });
}

franson_status franson_config_set(franson_config* cfg, const char* key, const char* value) {
    if (cfg == nullptr || key == nullptr || value == nullptr)
        return fail_invalid("config handle, key or value is null");
    return guarded([&] { cfg->cfg.set(key, value); });
}

franson_status franson_config_get(const franson_config* cfg, const char* key, char* buffer,
                                  size_t size) {
    if (cfg == nullptr || key == nullptr) return fail_invalid("config handle or key is null");
    std::string value;
    const franson_status st = guarded([&] { value = cfg->cfg.get(key); });
    if (st != FRANSON_OK) return st;
    return copy_to_buffer(value, buffer, size);
}

franson_status franson_config_hash(const franson_config* cfg, char* buffer, size_t size) {
    if (cfg == nullptr) return fail_invalid("config handle is null");
    std::string value;
    const franson_status st = guarded([&] { value = cfg->cfg.hash(); });
    if (st != FRANSON_OK) return st;
    return copy_to_buffer(value, buffer, size);
}

const char* franson_config_keys(void) {
    static const std::string table = [] {
        ExperimentConfig defaults;
        std::string out;
        for (const auto& spec : ExperimentConfig::keys()) {
            out += spec.name;
            out += '\t';
            switch (spec.type) {
                case ExperimentConfig::KeyType::f64:
                    out += "float";
                    break;
                case ExperimentConfig::KeyType::u64:
                    out += "uint";
                    break;
                case ExperimentConfig::KeyType::i64:
                    out += "int";
                    break;
                case ExperimentConfig::KeyType::str:
                    out += "string";
                    break;
            }
            out += '\t';
            out += defaults.get(spec.name);
            out += '\t';
            out += spec.doc;
            out += '\n';
        }
        return out;
    }();
    return table.c_str();
}

franson_status franson_run_validate(const franson_config* cfg, char** json_out) {
    if (cfg == nullptr || json_out == nullptr) return fail_invalid("config or output is null");
    return guarded([&] {
        const auto report = franson::pipeline::run_validate(cfg->cfg);
        *json_out = dup_string(franson::pipeline::regime_json(report, cfg->cfg));
    });
}

franson_status franson_run_simulate(const franson_config* cfg, const char* out_dir,
                                    char** json_out) {
    if (cfg == nullptr || json_out == nullptr) return fail_invalid("config or output is null");
    return guarded([&] {
        const auto sim = franson::pipeline::simulate(cfg->cfg);
        const std::string dir = out_dir != nullptr ? out_dir : cfg->cfg.out_dir;
        const auto paths = franson::pipeline::write_tag_files(sim, dir, cfg->cfg.tag_format);
        *json_out = dup_string(franson::pipeline::simulate_json(sim, paths, cfg->cfg.tag_format));
    });
}

franson_status franson_run_coincide(const franson_config* cfg, const char* const tag_paths[4],
                                    const char* histogram_csv_path, char** json_out) {
    if (cfg == nullptr || tag_paths == nullptr || json_out == nullptr)
        return fail_invalid("config, tag paths or output is null");
    for (int i = 0; i < 4; ++i)
        if (tag_paths[i] == nullptr) return fail_invalid("tag path is null");
    return guarded([&] {
        const std::array<std::string, 4> paths = {tag_paths[0], tag_paths[1], tag_paths[2],
                                                  tag_paths[3]};
        const auto result = franson::pipeline::coincide_files(cfg->cfg, paths);
        if (histogram_csv_path != nullptr)
            franson::pipeline::write_histogram_csv(histogram_csv_path, result.histogram,
                                                   result.config_hash);
        *json_out = dup_string(franson::pipeline::coincide_json(result));
    });
}

franson_status franson_run_scan(const franson_config* cfg, const char* csv_path,
                                char** json_out) {
    if (cfg == nullptr || json_out == nullptr) return fail_invalid("config or output is null");
    return guarded([&] {
        const auto result = franson::pipeline::run_scan(cfg->cfg);
        if (csv_path != nullptr) franson::pipeline::write_scan_csv(csv_path, result);
        *json_out = dup_string(franson::pipeline::scan_json(result));
    });
}

franson_status franson_run_chsh(const franson_config* cfg, char** json_out) {
    if (cfg == nullptr || json_out == nullptr) return fail_invalid("config or output is null");
    return guarded([&] {
        const auto run = franson::pipeline::run_chsh(cfg->cfg);
        *json_out = dup_string(franson::pipeline::chsh_json(run));
    });
}

franson_status franson_run_chsh_from_files(const franson_config* cfg,
                                           const char* const coincide_json_paths[4],
                                           char** json_out) {
    if (cfg == nullptr || coincide_json_paths == nullptr || json_out == nullptr)
        return fail_invalid("config, input paths or output is null");
    for (int i = 0; i < 4; ++i)
        if (coincide_json_paths[i] == nullptr) return fail_invalid("coincide JSON path is null");
    return guarded([&] {
        const std::array<std::string, 4> paths = {coincide_json_paths[0], coincide_json_paths[1],
                                                  coincide_json_paths[2], coincide_json_paths[3]};
        const auto run = franson::pipeline::chsh_from_coincide_files(cfg->cfg, paths);
        *json_out = dup_string(franson::pipeline::chsh_json(run));
    });
}

franson_status franson_run_compare(const franson_config* cfg, const char* event_scan_csv,
                                   char** json_out) {
    if (cfg == nullptr || json_out == nullptr) return fail_invalid("config or output is null");
    return guarded([&] {
        const auto report = event_scan_csv != nullptr
                                ? franson::pipeline::compare_with_scan_file(cfg->cfg,
                                                                            event_scan_csv)
                                : franson::pipeline::run_compare(cfg->cfg);
        *json_out = dup_string(franson::pipeline::compare_json(report));
    });
}

void franson_string_free(char* s) { delete[] s; }

franson_status franson_match_coincidences(const int64_t* a, size_t a_len, const int64_t* b,
                                          size_t b_len, int64_t offset_ps, int64_t half_width_ps,
                                          uint64_t* count_out) {
    if ((a == nullptr && a_len > 0) || (b == nullptr && b_len > 0) || count_out == nullptr)
        return fail_invalid("tag array or output is null");
    return guarded([&] {
        franson::TimeTagStream sa, sb;
        sa.channel = 1;
        sb.channel = 2;
        sa.tags_ps.assign(a, a + a_len);
        sb.tags_ps.assign(b, b + b_len);
        const franson::CoincidenceWindow win{offset_ps, half_width_ps};
        *count_out = franson::match_coincidences(sa, sb, win).count;
    });
}

franson_status franson_delay_histogram(const int64_t* a, size_t a_len, const int64_t* b,
                                       size_t b_len, int64_t bin_width_ps, int64_t range_ps,
                                       uint64_t* counts, size_t counts_len, size_t* bins_out) {
    if ((a == nullptr && a_len > 0) || (b == nullptr && b_len > 0) || counts == nullptr ||
        bins_out == nullptr)
        return fail_invalid("tag array or output is null");
    return guarded([&] {
        franson::TimeTagStream sa, sb;
        sa.channel = 1;
        sb.channel = 2;
        sa.tags_ps.assign(a, a + a_len);
        sb.tags_ps.assign(b, b + b_len);
        const auto hist = franson::delay_histogram(sa, sb, bin_width_ps, range_ps);
        if (hist.counts.size() > counts_len)
            franson::throw_invalid("counts buffer holds " + std::to_string(counts_len) +
                                   " bins, need " + std::to_string(hist.counts.size()));
        std::memcpy(counts, hist.counts.data(), hist.counts.size() * sizeof(uint64_t));
        *bins_out = hist.counts.size();
    });
}

} // extern "C"
