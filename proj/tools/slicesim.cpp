#include "slicesim/e2/codec.hpp"
#include "slicesim/harness/report.hpp"
#include "slicesim/harness/runner.hpp"
#include "slicesim/harness/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace sh = slicesim::harness;
namespace e2 = slicesim::e2;

namespace
{
std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error(fmt::format("cannot open {}", path));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_validate(const std::string& file)
{
    std::vector<std::string> violations;
    try
    {
        const auto s = sh::parse_scenario(read_file(file), violations);
        if (violations.empty())
        {
            violations = sh::validate(s);
        }
    }
    catch (const sh::ParseError& e)
    {
        std::cerr << fmt::format("{}:{}:{}: parse error: {}\n", file, e.line(), e.column(), e.what());
        return 2;
    }
    if (violations.empty())
    {
        std::cout << fmt::format("{}: valid\n", file);
        return 0;
    }
    for (const auto& v : violations)
    {
        std::cout << fmt::format("{}: {}\n", file, v);
    }
    std::cout << fmt::format("{}: {} violation(s)\n", file, violations.size());
    return 1;
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed, std::string out, bool trace)
{
    sh::Scenario s;
    try
    {
        s = sh::load_scenario_file(file);
    }
    catch (const sh::ParseError& e)
    {
        std::cerr << fmt::format("{}:{}:{}: parse error: {}\n", file, e.line(), e.column(), e.what());
        return 2;
    }
    catch (const sh::ScenarioInvalid& e)
    {
        for (const auto& v : e.violations())
            std::cerr << fmt::format("{}: {}\n", file, v);
        return 1;
    }
    const std::filesystem::path dir = out.empty() ? sh::default_out_root() / s.meta.name : std::filesystem::path(out);
    sh::RunArtifacts a;
    try
    {
        a = sh::simulate(s, sh::RunOptions{seed, trace});
    }
    catch (const sh::SimulationFault& e)
    {
        std::cerr << e.what() << "\n";
        return 3;
    }
    sh::write_artifacts(a, dir);
    std::cout << fmt::format("{} -> {}\n", s.meta.name, dir.string());
    return 0;
}

int cmd_report(const std::string& dir)
{
    try
    {
        const auto r = sh::build_report(dir);
        std::cout << r.render();
        return r.all_pass() ? 0 : 1;
    }
    catch (const sh::MissingArtifacts& e)
    {
        std::cerr << "MissingArtifacts: " << e.what() << "\n";
        return 2;
    }
}

int cmd_e2dump(const std::string& file)
{
    const auto bytes = e2::parse_hex(read_file(file));
    if (!bytes)
    {
        std::cerr << fmt::format("{}: not a hex dump\n", file);
        return 2;
    }
    const auto r = e2::decode(*bytes);
    if (r.message)
    {
        const auto text = e2::describe(*r.message);
        std::cout << text << (text.ends_with('\n') ? "" : "\n");
    }
    if (r.error)
    {
        std::cout << fmt::format("decode error: {}\n", e2::to_string(*r.error));
        return 1;
    }
    return 0;
}
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"5G RAN / slicing / near-RT RIC simulator"};
    app.require_subcommand(1);

    std::string file;
    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("file", file)->required();

    std::optional<std::uint64_t> seed;
    std::string out;
    bool trace = false;
    auto* run = app.add_subcommand("run", "run a scenario");
    run->add_option("file", file)->required();
    run->add_option("--seed", seed, "override meta.seed");
    run->add_option("--out", out, "output directory (default $SLICESIM_OUT/<name> or out/<name>)");
    run->add_flag("--trace", trace, "write trace.log with every dispatched event");

    std::string dir;
    auto* report = app.add_subcommand("report", "compare a run against reference values");
    report->add_option("dir", dir)->required();

    auto* dump = app.add_subcommand("e2dump", "decode a hex-encoded E2 message");
    dump->add_option("hexfile", file)->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*validate)
            return cmd_validate(file);
        if (*run)
            return cmd_run(file, seed, out, trace);
        if (*report)
            return cmd_report(dir);
        if (*dump)
            return cmd_e2dump(file);
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
