#pragma once

// Server-side HTML. Every renderer is a pure function of its arguments:
// the same input always yields the same bytes. Times are shown as absolute
// UTC instants so that pages do not change merely because time passes.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "buildmgr/core_model.hpp"
#include "buildmgr/store.hpp"

namespace buildmgr {

std::string html_escape(std::string_view text);

std::string render_dashboard(const SystemState& state);

// Queued tasks first (unnamed, by submission time), then running jobs, then
// finished results, newest first. Inputs are filtered to `kind` here.
std::string render_overview(std::string_view kind, std::span<const Result> results,
                            std::span<const Job> running, std::span<const Task> queue);

// What a build page is about: a queued task, a job (running or just
// finished), or a finished result.
struct BuildPage {
  std::optional<Task> task;
  std::optional<Job> job;
  std::optional<Result> result;
  // Set for private pages; the cancel form posts to /private/<uuid>/cancel.
  std::optional<Uuid> private_uuid;
  // Cancelled while still queued: no job or result will ever exist.
  bool dequeued = false;
  std::string notice;
};

struct LogView {
  std::optional<std::string> text;  // nullopt: log unavailable
  bool truncated = false;
};

std::string render_build(const BuildPage& page, const LogView& log);

// Outer page that embeds `inner_path` in an iframe and loads the client script.
std::string render_shell(std::string_view inner_path);

std::string render_error(int status, std::string_view message);

}  // namespace buildmgr
