#include "emoface/eval/report.hpp"

#include <sstream>

#include "emoface/common/text.hpp"

namespace emoface::eval {

std::string reports_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  os.precision(17);
  os << "metric,value,dataset,config_hash,seed\n";
  for (const auto& r : reports)
    os << r.metric << ',' << r.value << ',' << r.dataset << ',' << r.config_hash << ',' << r.seed << '\n';
  return os.str();
}

nlohmann::ordered_json reports_json(const std::vector<EvalReport>& reports,
                                    const std::vector<DirectionalCheck>& checks) {
  nlohmann::ordered_json j;
  auto& rs = j["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : reports)
    rs.push_back({{"metric", r.metric},
                  {"value", r.value},
                  {"dataset", r.dataset},
                  {"config_hash", r.config_hash},
                  {"seed", r.seed}});
  auto& cs = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) cs.push_back({{"claim", c.claim}, {"passed", c.passed}});
  return j;
}

void write_reports(const std::filesystem::path& prefix, const std::vector<EvalReport>& reports,
                   const std::vector<DirectionalCheck>& checks) {
  auto with_ext = [&](const char* ext) {
    auto p = prefix;
    p += ext;
    return p;
  };
  write_file(with_ext(".csv"), reports_csv(reports));
  write_file(with_ext(".json"), reports_json(reports, checks).dump(1) + "\n");
}

}  // namespace emoface::eval
