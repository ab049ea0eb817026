#include "buildmgr/log_format.hpp"

#include <vector>

#include "buildmgr/error.hpp"

namespace buildmgr {

namespace {

constexpr std::string_view kOutputMarker = "=== output";
constexpr std::string_view kEndMarker = "=== end";
constexpr std::string_view kComponentPrefix = "component.";

[[noreturn]] void malformed(const std::string& why) {
  throw Error(ErrorCode::MalformedHeader, why);
}

}  // namespace

std::string log_header(const JobName& name, const std::map<std::string, std::string>& revisions,
                       Timestamp started_at) {
  std::string out;
  out += kLogMagic;
  out += "\nname: " + name.str() + "\nkind: " + name.kind.str() + "\n";
  for (const auto& [component, rev] : revisions) {
    out += std::string(kComponentPrefix) + component + ": " + rev + "\n";
  }
  out += "started: " + format_rfc3339(started_at) + "\n";
  out += kOutputMarker;
  out += "\n";
  return out;
}

std::string log_header(const JobName& name, const BuildConfig& config, Timestamp started_at) {
  std::map<std::string, std::string> revisions;
  for (const auto& [component, rev] : config.components) {
    revisions[component.str()] = revision_token(rev);
  }
  return log_header(name, revisions, started_at);
}

std::string log_trailer(std::string_view output_so_far, ResultStatus status,
                        Timestamp finished_at) {
  std::string out;
  if (!output_so_far.empty() && output_so_far.back() != '\n') out += "\n";
  out += kEndMarker;
  out += "\nstatus: " + std::string(to_string(status)) + "\nfinished: " +
         format_rfc3339(finished_at) + "\n";
  return out;
}

LogMeta parse_log_meta(std::string_view log) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= log.size()) return std::nullopt;
    const auto nl = log.find('\n', pos);
    if (nl == std::string_view::npos) return std::nullopt;  // header lines are terminated
    auto line = log.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };

  auto first = next_line();
  if (!first || *first != kLogMagic) malformed("missing log magic line");

  LogMeta meta;
  std::optional<JobName> name;
  std::optional<std::string> kind;
  std::optional<Timestamp> started;
  bool saw_output = false;
  while (auto line = next_line()) {
    if (*line == kOutputMarker) {
      saw_output = true;
      break;
    }
    const auto colon = line->find(": ");
    if (colon == std::string_view::npos) malformed("bad header line");
    const auto key = line->substr(0, colon);
    const auto value = line->substr(colon + 2);
    if (key == "name") {
      name = JobName::parse(value);
      if (!name) malformed("bad job name");
    } else if (key == "kind") {
      kind = std::string(value);
    } else if (key == "started") {
      started = parse_rfc3339(value);
      if (!started) malformed("bad start time");
    } else if (key.starts_with(kComponentPrefix)) {
      const auto component = key.substr(kComponentPrefix.size());
      if (!is_identifier(component) || value.empty()) malformed("bad component line");
      meta.component_revisions[std::string(component)] = std::string(value);
    }
    // Unknown keys are tolerated so older readers accept newer headers.
  }
  if (!saw_output) malformed("header not terminated");
  if (!name || !kind || !started) malformed("incomplete header");
  if (name->kind.str() != *kind) malformed("kind does not match name");
  meta.name = *name;
  meta.started_at = *started;

  // Trailer: the final three lines of the file, so build output that happens
  // to contain the end marker is harmless.
  const auto body = log.substr(pos);
  meta.status = ResultStatus::Aborted;
  meta.finished_at = meta.started_at;
  if (!body.empty() && body.back() == '\n') {
    std::vector<std::string_view> tail;
    std::size_t end = body.size() - 1;  // index of the final '\n'
    while (tail.size() < 3) {
      const auto prev = end == 0 ? std::string_view::npos : body.rfind('\n', end - 1);
      const std::size_t start = prev == std::string_view::npos ? 0 : prev + 1;
      tail.push_back(body.substr(start, end - start));
      if (prev == std::string_view::npos) break;
      end = prev;
    }
    if (tail.size() == 3 && tail[2] == kEndMarker && tail[1].starts_with("status: ") &&
        tail[0].starts_with("finished: ")) {
      auto status = parse_result_status(tail[1].substr(8));
      auto finished = parse_rfc3339(tail[0].substr(10));
      if (status && finished) {
        meta.status = *status;
        meta.finished_at = *finished;
      }
    }
  }
  return meta;
}

Result result_from_meta(const LogMeta& meta, std::string log_ref) {
  return Result{meta.name,       meta.status,      meta.component_revisions,
                meta.started_at, meta.finished_at, std::move(log_ref)};
}

std::string partial_log_ref(const JobName& name) {
  return name.kind.str() + "/" + std::to_string(name.serial) + ".log.partial";
}

std::string final_log_ref(const JobName& name) {
  return name.kind.str() + "/" + std::to_string(name.serial) + ".log.gz";
}

}  // namespace buildmgr
