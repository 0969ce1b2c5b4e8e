#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "mtrec/error.hpp"
#include "mtrec/experiment.hpp"

namespace mtrec {
namespace {

using json = nlohmann::json;

std::string fixed4(double v) { return fmt::format("{:.4f}", v); }

std::string mean_cell(const SampleSummary& s) { return s.n == 0 ? "n/a" : fixed4(s.mean); }

std::string mean_sd_cell(const SampleSummary& s) {
  if (s.n == 0) return "n/a";
  return fmt::format("{} ({})", fixed4(s.mean), s.sd ? fixed4(*s.sd) : "n/a");
}

std::string t_cell(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return fixed4(t);
}

// "k=5" -> "5"
std::string sweep_value(const std::string& group) {
  const auto eq = group.find('=');
  return eq == std::string::npos ? group : group.substr(eq + 1);
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.10g}", v);
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  if (name == "jsonl") return ReportFormat::kJsonl;
  throw InvalidArgument("unknown report format '" + std::string(name) + "'");
}

std::string render_markdown(const Report& report) {
  std::string out;
  auto line = [&out](std::string_view s) {
    out += s;
    out += '\n';
  };

  switch (report.protocol) {
    case Protocol::kMrEval: line("# Results of MRs"); break;
    case Protocol::kSweepK: line("# Results of k in different top-k recommendations"); break;
    case Protocol::kSweepL: line("# Results of l items per user in the prompt"); break;
  }
  line("");
  line("## Configuration");
  line("");
  line("```json");
  line(report.config.dump(2));
  line("```");
  line("");

  if (report.protocol == Protocol::kMrEval) {
    line("| Method | Kendall τ (SD) | RBO (SD) | Overlap ratio (SD) |");
    line("|---|---|---|---|");
    for (const auto& row : report.rows) {
      line(fmt::format("| {} | {} | {} | {} |", group_label(row.group), mean_sd_cell(row.kendall),
                       mean_sd_cell(row.rbo), mean_sd_cell(row.overlap)));
    }
    line("");
    const std::string kind = report.config.value("stats", json::object()).value("t_test", "welch");
    line(fmt::format("## Unpaired t-test against No change ({})", kind));
    line("");
    line("| Method | Kendall τ t | Kendall τ p | RBO t | RBO p | Overlap ratio t | Overlap ratio p |");
    line("|---|---|---|---|---|---|---|");
    for (const auto& c : report.comparisons) {
      line(fmt::format("| {} | {} | {} | {} | {} | {} | {} |", group_label(c.group),
                       t_cell(c.kendall.t), format_p_value(c.kendall.p_two_tailed),
                       t_cell(c.rbo.t), format_p_value(c.rbo.p_two_tailed), t_cell(c.overlap.t),
                       format_p_value(c.overlap.p_two_tailed)));
    }
  } else {
    const char* axis = report.protocol == Protocol::kSweepK ? "k" : "l";
    line(fmt::format("| {} | Kendall τ | RBO | Overlap Ratio |", axis));
    line("|---|---|---|---|");
    for (const auto& row : report.rows) {
      line(fmt::format("| {} | {} | {} | {} |", sweep_value(row.group), mean_cell(row.kendall),
                       mean_cell(row.rbo), mean_cell(row.overlap)));
    }
  }
  line("");
  line("## Exclusions");
  line("");
  line("| Cause | Count |");
  line("|---|---|");
  for (const auto& [cause, count] : report.exclusions) {
    line(fmt::format("| {} | {} |", cause, count));
  }
  return out;
}

std::string render_csv(const Report& report) {
  std::string out = "# config: " + report.config.dump() + "\n";
  out += "protocol,row,metric,n,mean,sd,users,t,df,p\n";
  const std::string protocol(to_string(report.protocol));

  auto comparison_for = [&](const std::string& group) -> const ComparisonRow* {
    for (const auto& c : report.comparisons) {
      if (c.group == group) return &c;
    }
    return nullptr;
  };

  for (const auto& row : report.rows) {
    const ComparisonRow* cmp = comparison_for(row.group);
    const std::pair<const char*, const SampleSummary*> metrics[] = {
        {"kendall_tau", &row.kendall}, {"rbo", &row.rbo}, {"overlap_ratio", &row.overlap}};
    const TTestResult* tests[] = {cmp ? &cmp->kendall : nullptr, cmp ? &cmp->rbo : nullptr,
                                  cmp ? &cmp->overlap : nullptr};
    for (std::size_t m = 0; m < 3; ++m) {
      const auto& s = *metrics[m].second;
      out += fmt::format("{},{},{},{},{},{},{}", protocol, row.group, metrics[m].first, s.n,
                         s.n ? csv_number(s.mean) : "", s.sd ? csv_number(*s.sd) : "",
                         row.users);
      if (tests[m]) {
        out += fmt::format(",{},{},{}\n", csv_number(tests[m]->t), csv_number(tests[m]->df),
                           csv_number(tests[m]->p_two_tailed));
      } else {
        out += ",,,\n";
      }
    }
  }
  return out;
}

std::string render_jsonl(const Report& report) {
  json header = {{"type", "header"},
                 {"protocol", to_string(report.protocol)},
                 {"config", report.config},
                 {"exclusions", report.exclusions}};
  std::string out = header.dump() + "\n";
  for (const auto& record : report.records) out += to_json(record).dump() + "\n";
  return out;
}

void emit_report(const Report& report, const std::filesystem::path& out_dir,
                 const std::vector<ReportFormat>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create output directory " + out_dir.string());
  }
  for (const auto format : formats) {
    switch (format) {
      case ReportFormat::kMarkdown:
        write_file(out_dir / "report.md", render_markdown(report));
        break;
      case ReportFormat::kCsv:
        write_file(out_dir / "report.csv", render_csv(report));
        break;
      case ReportFormat::kJsonl:
        write_file(out_dir / "runs.jsonl", render_jsonl(report));
        break;
    }
  }
}

Report load_report(const std::filesystem::path& runs_jsonl) {
  std::ifstream in(runs_jsonl, std::ios::binary);
  if (!in) throw IoError("cannot read " + runs_jsonl.string());
  std::string text;
  std::size_t line_no = 0;
  std::optional<json> header;
  std::vector<RunRecord> records;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
      if (!header) {
        if (j.value("type", "") != "header") {
          throw ParseError("runs file does not start with a header record", line_no);
        }
        header = std::move(j);
      } else {
        records.push_back(run_record_from_json(j));
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad run record: ") + e.what(), line_no);
    }
  }
  if (!header) throw ParseError("empty runs file", 0);

  const Protocol protocol = protocol_from_string(header->at("protocol").get<std::string>());
  const ExperimentPlan plan =
      plan_from_json(header->at("config"), ExperimentPlan::defaults(protocol));
  Report report = build_report(plan, std::move(records), {});
  // The header holds the complete exclusion table, corpus-level counts included.
  report.exclusions = header->at("exclusions").get<std::map<std::string, std::size_t>>();
  report.config = header->at("config");
  return report;
}

}  // namespace mtrec
