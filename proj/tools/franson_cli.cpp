// Command-line front end. Talks to the simulation core exclusively through
// the C API in franson/franson.h; every config key doubles as a flag and a
// flag always overrides the config file.

#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "franson/franson.h"

namespace {

int exit_code(franson_status status) {
    switch (status) {
        case FRANSON_OK:
            return 0;
        case FRANSON_ERROR_INVALID_ARGUMENT:
            return 2;
        case FRANSON_ERROR_REGIME:
            return 3;
        case FRANSON_ERROR_IO:
            return 4;
        case FRANSON_ERROR_INTERNAL:
            return 1;
    }
    return 1;
}

[[noreturn]] void die(franson_status status) {
    std::cerr << "error (" << franson_status_name(status) << "): " << franson_last_error()
              << "\n";
    std::exit(exit_code(status));
}

void check(franson_status status) {
    if (status != FRANSON_OK) die(status);
}

struct KeyFlag {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
};

struct CommonArgs {
    std::string config_path;
    std::deque<KeyFlag> keys;
};

std::vector<std::vector<std::string>> parse_key_table() {
    std::vector<std::vector<std::string>> rows;
    const std::string table = franson_config_keys();
    std::size_t pos = 0;
    while (pos < table.size()) {
        std::size_t eol = table.find('\n', pos);
        if (eol == std::string::npos) eol = table.size();
        const std::string line = table.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t t = 0;
        while (t <= line.size()) {
            std::size_t tab = line.find('\t', t);
            if (tab == std::string::npos) tab = line.size();
            fields.push_back(line.substr(t, tab - t));
            t = tab + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

void add_common_flags(CLI::App* sub, CommonArgs& args) {
    sub->add_option("-c,--config", args.config_path,
                    "config file (JSON; default from $FRANSON_CONFIG)");
    for (const auto& row : parse_key_table()) {
        args.keys.push_back(KeyFlag{row[0], "", nullptr});
        KeyFlag& flag = args.keys.back();
        const std::string doc = row.size() > 3 ? row[3] + " [" + row[2] + "]" : "";
        flag.option = sub->add_option("--" + flag.key, flag.value, doc);
        if (row.size() > 1) flag.option->type_name(row[1]);
    }
}

struct ConfigDeleter {
    void operator()(franson_config* cfg) const { franson_config_destroy(cfg); }
};
using ConfigHandle = std::unique_ptr<franson_config, ConfigDeleter>;

ConfigHandle build_config(const CommonArgs& args) {
    ConfigHandle cfg(franson_config_create());
    if (!cfg) die(FRANSON_ERROR_INTERNAL);
    std::string path = args.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("FRANSON_CONFIG")) path = env;
    }
    if (!path.empty()) check(franson_config_load(cfg.get(), path.c_str()));
    for (const KeyFlag& flag : args.keys)
        if (flag.option->count() > 0)
            check(franson_config_set(cfg.get(), flag.key.c_str(), flag.value.c_str()));
    return cfg;
}

std::string config_value(const franson_config* cfg, const char* key) {
    char buf[512];
    check(franson_config_get(cfg, key, buf, sizeof(buf)));
    return buf;
}

struct JsonOut {
    char* text = nullptr;
    ~JsonOut() { franson_string_free(text); }
};

void emit(const JsonOut& json, const std::string& out_path) {
    std::fputs(json.text, stdout);
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        out << json.text;
        if (!out) {
            std::cerr << "error (io error): cannot write '" << out_path << "'\n";
            std::exit(4);
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Franson interferometry simulator and coincidence analyzer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(franson_version()));

    auto* validate = app.add_subcommand("validate", "check the operating regime");
    auto* simulate = app.add_subcommand("simulate", "emit four detector time-tag files");
    auto* coincide = app.add_subcommand("coincide", "delay histogram + windowed counts from tag files");
    auto* scan = app.add_subcommand("scan", "sweep a phase and write rates to CSV");
    auto* chsh = app.add_subcommand("chsh", "full simulate->coincide->CHSH pipeline");
    auto* compare = app.add_subcommand("compare", "analytic vs Monte Carlo report");

    CommonArgs validate_args, simulate_args, coincide_args, scan_args, chsh_args, compare_args;
    add_common_flags(validate, validate_args);
    add_common_flags(simulate, simulate_args);
    add_common_flags(coincide, coincide_args);
    add_common_flags(scan, scan_args);
    add_common_flags(chsh, chsh_args);
    add_common_flags(compare, compare_args);

    std::string out_path;
    validate->add_option("--out", out_path, "also write the JSON report here");
    chsh->add_option("--out", out_path, "also write the JSON result here");
    compare->add_option("--out", out_path, "also write the JSON report here");
    coincide->add_option("--out", out_path, "also write the JSON counts here");
    simulate->add_option("--out", out_path, "also write the JSON manifest here");

    std::string sim_out_dir;
    simulate->add_option("--out-dir", sim_out_dir, "directory for the tag files");

    std::vector<std::string> tag_files;
    std::string tag_dir, hist_out;
    coincide->add_option("--tag-file", tag_files,
                         "tag file for channels 1..4, in order (give four times)")
        ->expected(0, 4);
    coincide->add_option("--tag-dir", tag_dir, "directory holding tags_ch1..tags_ch4");
    coincide->add_option("--hist-out", hist_out, "write the delay histogram CSV here");

    std::string scan_csv = "scan.csv";
    scan->add_option("--out", scan_csv, "scan CSV path [scan.csv]");

    std::vector<std::string> from_coincide;
    chsh->add_option("--from-coincide", from_coincide,
                     "four saved coincide JSON files, term order (a,b) (a,b') (a',b) (a',b')")
        ->expected(0, 4);

    std::string event_scan;
    compare->add_option("--event-scan", event_scan,
                        "reuse this event-mode scan CSV as the Monte Carlo side");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        ConfigHandle cfg = build_config(validate_args);
        JsonOut json;
        check(franson_run_validate(cfg.get(), &json.text));
        emit(json, out_path);
    } else if (simulate->parsed()) {
        ConfigHandle cfg = build_config(simulate_args);
        JsonOut json;
        const char* dir = sim_out_dir.empty() ? nullptr : sim_out_dir.c_str();
        check(franson_run_simulate(cfg.get(), dir, &json.text));
        emit(json, out_path);
    } else if (coincide->parsed()) {
        ConfigHandle cfg = build_config(coincide_args);
        std::vector<std::string> paths = tag_files;
        if (paths.empty()) {
            std::string dir = tag_dir.empty() ? config_value(cfg.get(), "out_dir") : tag_dir;
            const std::string fmt = config_value(cfg.get(), "tag_format");
            for (int c = 1; c <= 4; ++c)
                paths.push_back(dir + "/tags_ch" + std::to_string(c) + "." + fmt);
        }
        if (paths.size() != 4) {
            std::cerr << "error (invalid argument): --tag-file must be given four times\n";
            return 2;
        }
        const char* cpaths[4] = {paths[0].c_str(), paths[1].c_str(), paths[2].c_str(),
                                 paths[3].c_str()};
        JsonOut json;
        check(franson_run_coincide(cfg.get(), cpaths, hist_out.empty() ? nullptr : hist_out.c_str(),
                                   &json.text));
        emit(json, out_path);
    } else if (scan->parsed()) {
        ConfigHandle cfg = build_config(scan_args);
        JsonOut json;
        check(franson_run_scan(cfg.get(), scan_csv.c_str(), &json.text));
        emit(json, "");
    } else if (chsh->parsed()) {
        ConfigHandle cfg = build_config(chsh_args);
        JsonOut json;
        if (from_coincide.empty()) {
            check(franson_run_chsh(cfg.get(), &json.text));
        } else if (from_coincide.size() == 4) {
            const char* cpaths[4] = {from_coincide[0].c_str(), from_coincide[1].c_str(),
                                     from_coincide[2].c_str(), from_coincide[3].c_str()};
            check(franson_run_chsh_from_files(cfg.get(), cpaths, &json.text));
        } else {
            std::cerr << "error (invalid argument): --from-coincide must be given four times\n";
            return 2;
        }
        emit(json, out_path);
    } else if (compare->parsed()) {
        ConfigHandle cfg = build_config(compare_args);
        JsonOut json;
        check(franson_run_compare(cfg.get(), event_scan.empty() ? nullptr : event_scan.c_str(),
                                  &json.text));
        emit(json, out_path);
    }
    return 0;
}
