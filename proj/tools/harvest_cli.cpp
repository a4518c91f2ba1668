#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <harvest/cli.hpp>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw harvest::config_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw harvest::config_error("cannot write " + path);
    out << content;
}

}

int main(int argc, char** argv) {
    CLI::App app{"two-impurity phonon response engine"};
    app.fallthrough();
    std::string config_path, preset, out_path;
    int threads = -1;
    bool oracle = false;
    app.add_option("--config", config_path, "run configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--preset", preset, "documented scan: fig2, fig3 or fig4")
        ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
    app.add_option("--out", out_path,
                   "primary output path; side artifacts get dotted suffixes");
    app.add_option("--threads", threads, "worker threads, 0 = auto")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--oracle", oracle,
                 "cross-check closed forms against the quadrature oracle");
    auto* sub_derive =
        app.add_subcommand("derive", "print derived condensate and detector scales");
    auto* sub_response =
        app.add_subcommand("response", "observables at the configured point");
    auto* sub_sweep =
        app.add_subcommand("sweep", "scan a variable; --preset reruns a documented scan");
    auto* sub_validate = app.add_subcommand(
        "validate", "run the consistency checks, nonzero exit on failure");
    app.require_subcommand(0, 1);

    CLI11_PARSE(app, argc, argv);

    try {
        harvest::RunConfig cfg;
        if (!config_path.empty())
            cfg = harvest::parse_config(read_file(config_path));
        // precedence: command line, then the [command] block, then environment
        if (!preset.empty()) cfg.command.preset = preset;
        if (!out_path.empty()) cfg.command.out = out_path;
        if (oracle) cfg.command.oracle = true;
        if (threads >= 0) {
            cfg.command.threads = threads;
        } else if (cfg.command.threads == 0) {
            if (const char* env = std::getenv("HARVEST_THREADS")) {
                const int t = std::atoi(env);
                if (t > 0) cfg.command.threads = t;
            }
        }
        std::string sub = cfg.command.subcommand;
        if (sub_derive->parsed()) sub = "derive";
        if (sub_response->parsed()) sub = "response";
        if (sub_sweep->parsed()) sub = "sweep";
        if (sub_validate->parsed()) sub = "validate";
        if (sub.empty()) {
            std::cerr << "harvest: no subcommand given and none configured; "
                         "expected derive, response, sweep or validate\n";
            return 2;
        }
        cfg.command.subcommand = sub;

        const auto t0 = std::chrono::steady_clock::now();
        harvest::CommandOutput out;
        if (sub == "derive") {
            out = harvest::cmd_derive(cfg);
        } else if (sub == "response") {
            out = harvest::cmd_response(cfg);
        } else if (sub == "sweep") {
            out = harvest::cmd_sweep(cfg);
        } else {
            std::optional<std::ifstream> table;
            std::istream* stream = nullptr;
            if (cfg.switching == harvest::SwitchingKind::tabulated) {
                table.emplace(cfg.switching_file, std::ios::binary);
                if (!*table)
                    throw harvest::config_error("cannot open " + cfg.switching_file);
                stream = &*table;
            }
            out = harvest::cmd_validate(cfg, stream);
        }
        const std::chrono::duration<double> dt =
            std::chrono::steady_clock::now() - t0;

        std::string manifest_text;
        if (out.manifest) {
            out.manifest->wall_time_s = dt.count();
            manifest_text = harvest::manifest_json(*out.manifest).dump(2) + "\n";
        }

        if (!cfg.command.out.empty()) {
            write_file(cfg.command.out, out.primary);
            for (const auto& [suffix, content] : out.side)
                write_file(cfg.command.out + "." + suffix, content);
            if (!manifest_text.empty())
                write_file(cfg.command.out + ".manifest.json", manifest_text);
        } else {
            std::cout << out.primary;
            for (const auto& [suffix, content] : out.side)
                std::cout << "# --- " << suffix << " ---\n" << content;
            if (sub == "derive") std::cout << '\n' << manifest_text;
        }
        return out.exit_code;
    } catch (const harvest::error& e) {
        std::cerr << "harvest: " << e.what() << '\n';
        return 2;
    }
}
