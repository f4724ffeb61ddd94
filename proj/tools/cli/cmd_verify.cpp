#include "emoface/eval/verify.hpp"
#include "support.hpp"

namespace emoface::cli {

namespace {

struct VerifyOptions {
  double tolerance = eval::kGradTolerance;
  std::size_t cases = 10000;
  std::vector<std::string> only;
};

void run(const Context& ctx, std::vector<eval::NamedCheck> checks, const VerifyOptions& o) {
  if (!o.only.empty()) {
    std::vector<eval::NamedCheck> picked;
    for (const auto& name : o.only) picked.push_back(eval::find_check(checks, name));
    checks = std::move(picked);
  }
  const auto report = eval::run_checks(checks);
  ctx.out << report.text();
  if (!report.passed()) throw CheckFailed(std::to_string(report.failures()) + " check(s) failed");
}

}  // namespace

void add_verify_commands(CLI::App& app, Context& ctx) {
  auto* verify = app.add_subcommand("verify", "Gradient and invariant self-checks");
  verify->require_subcommand(1);

  auto g = std::make_shared<VerifyOptions>();
  auto* grad = verify->add_subcommand("gradcheck", "Central finite differences for every layer and loss");
  grad->add_option("--tolerance", g->tolerance, "Max relative error");
  grad->add_option("--only", g->only, "Run only the named checks");
  grad->callback([&ctx, g] { run(ctx, eval::gradient_checks(g->tolerance), *g); });

  auto i = std::make_shared<VerifyOptions>();
  auto* inv = verify->add_subcommand("invariants", "Randomized property checks");
  inv->add_option("--cases", i->cases, "Random cases per property")->check(CLI::PositiveNumber);
  inv->add_option("--only", i->only, "Run only the named checks");
  inv->callback([&ctx, i] { run(ctx, eval::invariant_checks(i->cases), *i); });
}

}  // namespace emoface::cli
