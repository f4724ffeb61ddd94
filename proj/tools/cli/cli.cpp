#include "cli.hpp"

#include <nlohmann/json.hpp>

#include "emoface/common/text.hpp"
#include "support.hpp"

namespace emoface::cli {

namespace {

int exit_code_for(const std::exception_ptr& e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const UsageError& x) {
    err << "usage error: " << x.what() << "\n";
    return kExitUsage;
  } catch (const CheckFailed& x) {
    err << "failed: " << x.what() << "\n";
    return kExitValidation;
  } catch (const IoError& x) {
    err << "i/o error: " << x.what() << "\n";
    return kExitIo;
  } catch (const TransportError& x) {
    err << "transport error: " << x.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& x) {
    err << "i/o error: " << x.what() << "\n";
    return kExitIo;
  } catch (const Error& x) {
    err << "error: " << x.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& x) {
    err << "error: " << x.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << "\n";
    return kExitValidation;
  }
}

int run_rerun(const std::string& sidecar, std::ostream& out, std::ostream& err) {
  const auto j = nlohmann::json::parse(read_file(sidecar), nullptr, false);
  if (j.is_discarded() || j.value("format", std::string()) != "emoface-run" || !j.contains("argv"))
    throw ValidationError(sidecar + " is not an emoface run sidecar");
  const auto args = j.at("argv").get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "rerun") throw ValidationError("sidecar records another rerun");
  const auto here = fs::current_path();
  fs::current_path(j.at("cwd").get<std::string>());
  const int code = run_cli(args, out, err);
  fs::current_path(here);
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{args, out, err};
  CLI::App app("Emotion-controllable speech-driven facial animation toolkit", "emoface");
  app.require_subcommand(1);
  app.set_version_flag("--version", "emoface 0.1.0");
  add_data_commands(app, ctx);
  add_tead_commands(app, ctx);
  add_train_commands(app, ctx);
  add_infer_command(app, ctx);
  add_eval_commands(app, ctx);
  add_verify_commands(app, ctx);

  std::string sidecar;
  int rerun_code = kExitOk;
  auto* rerun = app.add_subcommand("rerun", "Repeat the command recorded in a .meta.json sidecar");
  rerun->add_option("sidecar", sidecar, "Sidecar file")->required();
  rerun->callback([&] { rerun_code = run_rerun(sidecar, out, err); });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "emoface 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
  return rerun_code;
}

}  // namespace emoface::cli
