#include <optional>
#include <string>

#include <CLI11.hpp>

#include <matsparse/cli.hpp>

namespace {

void add_common_flags(CLI::App* sub, matsparse::CliConfig& cfg, bool epsilon_flag = true) {
    sub->add_option("--input", cfg.input_path, "input Matrix Market file")->required();
    if (epsilon_flag) sub->add_option("--epsilon", cfg.epsilon, "accuracy parameter");
    sub->add_option("--seed", cfg.seed, "RNG seed (default 0)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse spectral-norm sketches of dense square matrices"};
    app.require_subcommand(1);

    matsparse::CliConfig cfg;
    bool relative = false;
    std::string format = "json";

    auto* sparsify = app.add_subcommand("sparsify", "threshold-and-sample a dense matrix");
    add_common_flags(sparsify, cfg);
    sparsify->add_option("--output", cfg.output_path, "sketch output path (coordinate)")
        ->required();
    sparsify->add_flag("--relative", relative,
                       "treat epsilon as relative to the spectral norm (two passes)");
    sparsify->add_option("--samples", cfg.s_override, "override the sample budget");

    auto* stream = app.add_subcommand("stream", "one-pass sparsify a coordinate file");
    add_common_flags(stream, cfg);
    stream->add_option("--output", cfg.output_path, "sketch output path (coordinate)")
        ->required();
    stream->add_option("--samples", cfg.s_override, "sample budget (required unless --frob-sq)");
    stream->add_option("--frob-sq", cfg.frob_sq,
                       "squared Frobenius norm, used to derive the sample budget");

    auto* verify = app.add_subcommand("verify", "measure ||A - sketch|| against epsilon");
    add_common_flags(verify, cfg);
    verify->add_option("--sketch", cfg.sketch_path, "sketch coordinate file")->required();

    auto* experiment = app.add_subcommand("experiment", "repeated-trial error study");
    add_common_flags(experiment, cfg);
    experiment->add_option("--output", cfg.output_path, "report output path (default stdout)");
    experiment->add_option("--trials", cfg.trials, "number of trials (default 200)");
    experiment->add_flag("--relative", relative,
                         "treat epsilon as relative to the spectral norm");
    experiment->add_option("--format", format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* moments = app.add_subcommand("moments", "second-moment diagnostics (n <= 64)");
    add_common_flags(moments, cfg);
    moments->add_option("--output", cfg.output_path, "JSON diagnostics output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? matsparse::exit_code::ok : matsparse::exit_code::usage;
    }

    if (sparsify->parsed()) cfg.command = matsparse::Command::sparsify;
    if (stream->parsed()) cfg.command = matsparse::Command::stream;
    if (verify->parsed()) cfg.command = matsparse::Command::verify;
    if (experiment->parsed()) cfg.command = matsparse::Command::experiment;
    if (moments->parsed()) cfg.command = matsparse::Command::moments;
    cfg.epsilon_mode =
        relative ? matsparse::EpsilonMode::relative : matsparse::EpsilonMode::absolute;
    cfg.report_format =
        format == "csv" ? matsparse::ReportFormat::csv : matsparse::ReportFormat::json;

    return matsparse::run_command(cfg);
}
