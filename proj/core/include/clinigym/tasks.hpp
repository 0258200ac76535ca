#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clinigym/trajectory.hpp"

namespace clinigym {

struct ExpectedAction {
    std::string tool_name;
    nlohmann::json arguments = nlohmann::json::object();
    std::vector<std::string> compare_args;  // subset of argument keys that must match
};

struct TaskRubric {
    std::vector<std::string> required_elements;
    std::vector<std::string> required_tools;
    std::vector<std::string> forbidden_elements;
};

enum class RewardBasis { action, nl_assertion };

struct Task {
    std::string id;  // 32-hex md5 of the canonical serialization
    std::string domain;
    std::string ticket;
    std::vector<ExpectedAction> expected_actions;
    std::vector<std::string> nl_assertions;  // case-insensitive substring/regex patterns
    std::vector<RewardBasis> reward_basis;
    std::optional<TaskRubric> rubric;
    std::optional<std::string> gold_answer;

    bool has_basis(RewardBasis b) const;
};

/// Canonical bytes hashed into the task id: the task serialized as compact
/// JSON, UTF-8, object keys sorted lexicographically, arrays in given
/// order, the id field excluded.
std::string canonical_task_bytes(const Task& task);

/// 32-hex MD5 digest of canonical_task_bytes().
std::string task_id(const Task& task);

nlohmann::json task_to_json(const Task& task, bool include_id = true);
Task task_from_json(const nlohmann::json& j);

struct TaskLoadResult {
    std::vector<Task> tasks;
    std::vector<std::string> diagnostics;  // one line per rejected record
};

/// Load a JSON array or JSONL file of tasks. Invalid records are reported
/// in diagnostics and skipped; ids are recomputed (and verified when the
/// file provides them). Throws IoError when unreadable and EmptySuiteError
/// when nothing valid remains.
TaskLoadResult load_tasks(const std::string& path);

struct McqaRecord {
    std::string question;
    std::vector<std::string> options;  // 2..5, lettered A..E in order
    std::string answer_key;            // "A".."E"
    std::string source;
};

/// Normalize an MCQA record into a Task: lettered ticket, ACTION basis,
/// expected analyze_answer_options + submit_answer(answer).
Task convert_mcqa(const McqaRecord& record);

// --- cross-domain pathways -------------------------------------------------

struct PhaseTransition {
    enum class Kind { action_completed, assertion_matched } kind = Kind::action_completed;
    std::string tool_name;  // for action_completed
    std::string pattern;    // for assertion_matched
};

struct PathwayPhase {
    std::string active_domain;
    std::vector<ExpectedAction> required_actions;
    std::vector<std::string> nl_assertions;
    PhaseTransition transition;
    bool time_pressure = false;
};

struct PathwaySpec {
    std::string name;
    std::vector<PathwayPhase> phases;  // >= 2
};

struct PathwayScore {
    std::vector<double> per_phase;
    std::vector<bool> entered;
    double overall = 0.0;
};

/// Segment the trajectory into phases (a phase ends when its transition
/// fires), score each entered phase on required-action coverage and
/// assertion matches, and average. Phases never entered score 0.
PathwayScore evaluate_pathway(const Trajectory& trajectory, const PathwaySpec& pathway);

/// The two built-in pathway fixtures (chest pain, sepsis bundle).
std::vector<PathwaySpec> builtin_pathways();

// --- synthetic micro-clinic domain ------------------------------------------

struct MicroClinicTask {
    Task task;
    std::vector<std::string> solution_actions;  // raw action texts, ends with submit_answer
    std::string correct_option;                 // "A".."D"
};

/// Deterministic n-task family over the 3-tool micro-clinic domain. The
/// correct option letter is revealed only by lookup_fact followed by
/// assess_case. Same seed, same suite.
std::vector<MicroClinicTask> micro_clinic_suite(std::uint64_t seed, std::size_t n);

/// True when the expected action matches the taken action: same tool name
/// and equal values for every compare_args key.
bool action_matches(const ExpectedAction& expected, const AgentAction& taken);

}  // namespace clinigym
