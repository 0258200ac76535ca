#include "clinigym/tasks.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <regex>
#include <sstream>

#include "clinigym/errors.hpp"
#include "clinigym/md5.hpp"
#include "clinigym/rng.hpp"
#include "clinigym/text.hpp"

namespace clinigym {

namespace {

std::string_view basis_name(RewardBasis b) {
    return b == RewardBasis::action ? "ACTION" : "NL_ASSERTION";
}

RewardBasis basis_from_string(std::string_view s) {
    if (s == "ACTION") return RewardBasis::action;
    if (s == "NL_ASSERTION") return RewardBasis::nl_assertion;
    throw ParseError("unknown reward_basis '" + std::string(s) + "'");
}

/// Case-insensitive pattern match against text. A pattern is tried as ECMA
/// regex first; if it fails to compile it degrades to substring search.
bool pattern_matches(const std::string& pattern, const std::string& text) {
    const std::string lower_text = text::to_lower(text);
    try {
        std::regex re(pattern, std::regex::ECMAScript | std::regex::icase);
        if (std::regex_search(text, re)) return true;
    } catch (const std::regex_error&) {
        // fall through to substring
    }
    return lower_text.find(text::to_lower(pattern)) != std::string::npos;
}

}  // namespace

bool Task::has_basis(RewardBasis b) const {
    return std::find(reward_basis.begin(), reward_basis.end(), b) != reward_basis.end();
}

nlohmann::json task_to_json(const Task& task, bool include_id) {
    nlohmann::json j;
    if (include_id) j["id"] = task.id;
    j["domain"] = task.domain;
    j["ticket"] = task.ticket;
    nlohmann::json actions = nlohmann::json::array();
    for (const auto& a : task.expected_actions) {
        actions.push_back({{"tool_name", a.tool_name},
                           {"arguments", a.arguments},
                           {"compare_args", a.compare_args}});
    }
    j["expected_actions"] = std::move(actions);
    j["nl_assertions"] = task.nl_assertions;
    nlohmann::json basis = nlohmann::json::array();
    for (auto b : task.reward_basis) basis.push_back(std::string(basis_name(b)));
    j["reward_basis"] = std::move(basis);
    if (task.rubric) {
        j["rubric"] = {{"required_elements", task.rubric->required_elements},
                       {"required_tools", task.rubric->required_tools},
                       {"forbidden_elements", task.rubric->forbidden_elements}};
    }
    if (task.gold_answer) j["gold_answer"] = *task.gold_answer;
    return j;
}

Task task_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("task record must be a JSON object");
    Task t;
    t.domain = j.at("domain").get<std::string>();
    t.ticket = j.at("ticket").get<std::string>();
    if (t.domain.empty()) throw ParseError("task domain must be non-empty");
    if (j.contains("expected_actions")) {
        for (const auto& a : j.at("expected_actions")) {
            ExpectedAction ea;
            ea.tool_name = a.at("tool_name").get<std::string>();
            ea.arguments = a.value("arguments", nlohmann::json::object());
            if (!ea.arguments.is_object()) throw ParseError("expected_action arguments must be an object");
            ea.compare_args = a.value("compare_args", std::vector<std::string>{});
            for (const auto& key : ea.compare_args) {
                if (!ea.arguments.contains(key)) {
                    throw ParseError("compare_args key '" + key + "' missing from arguments");
                }
            }
            t.expected_actions.push_back(std::move(ea));
        }
    }
    t.nl_assertions = j.value("nl_assertions", std::vector<std::string>{});
    if (!j.contains("reward_basis") || j.at("reward_basis").empty()) {
        throw ParseError("reward_basis must be a non-empty array");
    }
    for (const auto& b : j.at("reward_basis")) {
        t.reward_basis.push_back(basis_from_string(b.get<std::string>()));
    }
    if (j.contains("rubric") && !j.at("rubric").is_null()) {
        TaskRubric r;
        const auto& rj = j.at("rubric");
        r.required_elements = rj.value("required_elements", std::vector<std::string>{});
        r.required_tools = rj.value("required_tools", std::vector<std::string>{});
        r.forbidden_elements = rj.value("forbidden_elements", std::vector<std::string>{});
        t.rubric = std::move(r);
    }
    if (j.contains("gold_answer") && !j.at("gold_answer").is_null()) {
        t.gold_answer = j.at("gold_answer").get<std::string>();
    }
    t.id = task_id(t);
    if (j.contains("id") && j.at("id").is_string()) {
        const auto provided = j.at("id").get<std::string>();
        if (!provided.empty() && provided != t.id) {
            throw ParseError("task id mismatch: file says " + provided + ", canonical is " + t.id);
        }
    }
    return t;
}

std::string canonical_task_bytes(const Task& task) {
    // nlohmann::json keeps object keys in std::map order, so dump() already
    // emits sorted keys with no insignificant whitespace.
    return task_to_json(task, /*include_id=*/false).dump();
}

std::string task_id(const Task& task) { return md5_hex(canonical_task_bytes(task)); }

TaskLoadResult load_tasks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open task file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    TaskLoadResult result;
    auto try_add = [&result](const nlohmann::json& record, const std::string& where) {
        try {
            result.tasks.push_back(task_from_json(record));
        } catch (const std::exception& e) {
            result.diagnostics.push_back(where + ": " + e.what());
        }
    };

    const std::string trimmed = text::trim(content);
    if (!trimmed.empty() && trimmed.front() == '[') {
        nlohmann::json arr = nlohmann::json::parse(trimmed, nullptr, false);
        if (arr.is_discarded() || !arr.is_array()) {
            throw IoError("'" + path + "' is neither a JSON array nor JSONL");
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            try_add(arr[i], "record " + std::to_string(i));
        }
    } else {
        std::istringstream lines(content);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(lines, line)) {
            ++line_no;
            if (text::trim(line).empty()) continue;
            nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
            if (record.is_discarded()) {
                result.diagnostics.push_back("line " + std::to_string(line_no) +
                                             ": invalid JSON");
                continue;
            }
            try_add(record, "line " + std::to_string(line_no));
        }
    }
    if (result.tasks.empty()) {
        throw EmptySuiteError("'" + path + "' contains no valid tasks (" +
                              std::to_string(result.diagnostics.size()) + " rejected)");
    }
    return result;
}

Task convert_mcqa(const McqaRecord& record) {
    if (record.options.size() < 2 || record.options.size() > 5) {
        throw ConversionError("MCQA record needs 2-5 options, got " +
                              std::to_string(record.options.size()));
    }
    if (record.answer_key.size() != 1) {
        throw ConversionError("MCQA record is missing a single-letter answer_key");
    }
    const char key = static_cast<char>(std::toupper(static_cast<unsigned char>(record.answer_key[0])));
    if (key < 'A' || key >= static_cast<char>('A' + record.options.size())) {
        throw ConversionError("answer_key '" + record.answer_key + "' is outside the option range");
    }

    Task t;
    t.domain = "medical_qa";
    std::string ticket = text::trim(record.question);
    ticket += "\n";
    for (std::size_t i = 0; i < record.options.size(); ++i) {
        ticket += "\n";
        ticket += static_cast<char>('A' + i);
        ticket += ") " + record.options[i];
    }
    if (!record.source.empty()) ticket += "\n\n[source: " + record.source + "]";
    t.ticket = std::move(ticket);
    t.gold_answer = std::string(1, key);
    ExpectedAction analyze;
    analyze.tool_name = "analyze_answer_options";
    ExpectedAction submit;
    submit.tool_name = "submit_answer";
    submit.arguments = {{"answer", std::string(1, key)}};
    submit.compare_args = {"answer"};
    t.expected_actions = {std::move(analyze), std::move(submit)};
    t.reward_basis = {RewardBasis::action};
    t.id = task_id(t);
    return t;
}

bool action_matches(const ExpectedAction& expected, const AgentAction& taken) {
    if (taken.kind != ActionKind::tool_call || taken.tool_name != expected.tool_name) return false;
    for (const auto& key : expected.compare_args) {
        if (!taken.arguments.is_object() || !taken.arguments.contains(key)) return false;
        const auto& want = expected.arguments.at(key);
        const auto& got = taken.arguments.at(key);
        if (want.is_string() && got.is_string()) {
            // Case-insensitive compare keeps "a" == "A" for option letters.
            if (text::to_lower(want.get<std::string>()) != text::to_lower(got.get<std::string>()))
                return false;
        } else if (want != got) {
            return false;
        }
    }
    return true;
}

PathwayScore evaluate_pathway(const Trajectory& trajectory, const PathwaySpec& pathway) {
    if (pathway.phases.size() < 2) throw ContractError("pathway needs at least 2 phases");

    // Attribute turns to phases; a phase closes once its transition fires.
    std::vector<std::vector<const TurnRecord*>> phase_turns(pathway.phases.size());
    std::size_t phase = 0;
    for (const auto& turn : trajectory.turns) {
        if (phase >= pathway.phases.size()) break;
        phase_turns[phase].push_back(&turn);
        const auto& tr = pathway.phases[phase].transition;
        bool fired = false;
        if (tr.kind == PhaseTransition::Kind::action_completed) {
            fired = turn.action.is_tool(tr.tool_name);
        } else {
            fired = pattern_matches(tr.pattern, turn.action.raw_text) ||
                    pattern_matches(tr.pattern, turn.tool_result_text);
        }
        if (fired) ++phase;
    }

    PathwayScore score;
    score.per_phase.resize(pathway.phases.size(), 0.0);
    score.entered.resize(pathway.phases.size(), false);
    for (std::size_t i = 0; i < pathway.phases.size(); ++i) {
        const auto& turns = phase_turns[i];
        score.entered[i] = !turns.empty();
        if (turns.empty()) continue;
        const PathwayPhase& spec = pathway.phases[i];

        double components = 0.0;
        int n_components = 0;
        if (!spec.required_actions.empty()) {
            int matched = 0;
            for (const auto& req : spec.required_actions) {
                bool hit = std::any_of(turns.begin(), turns.end(), [&](const TurnRecord* t) {
                    return action_matches(req, t->action);
                });
                if (hit) ++matched;
            }
            components += static_cast<double>(matched) /
                          static_cast<double>(spec.required_actions.size());
            ++n_components;
        }
        if (!spec.nl_assertions.empty()) {
            int matched = 0;
            for (const auto& pattern : spec.nl_assertions) {
                bool hit = std::any_of(turns.begin(), turns.end(), [&](const TurnRecord* t) {
                    return pattern_matches(pattern, t->action.raw_text) ||
                           pattern_matches(pattern, t->tool_result_text);
                });
                if (hit) ++matched;
            }
            components +=
                static_cast<double>(matched) / static_cast<double>(spec.nl_assertions.size());
            ++n_components;
        }
        score.per_phase[i] = n_components == 0 ? 1.0 : components / n_components;
    }
    double sum = 0.0;
    for (double s : score.per_phase) sum += s;
    score.overall = sum / static_cast<double>(pathway.phases.size());
    return score;
}

std::vector<PathwaySpec> builtin_pathways() {
    std::vector<PathwaySpec> out;

    PathwaySpec chest_pain;
    chest_pain.name = "chest_pain";
    {
        PathwayPhase triage;
        triage.active_domain = "triage_emergency";
        ExpectedAction vitals;
        vitals.tool_name = "get_vital_signs";
        ExpectedAction ecg;
        ecg.tool_name = "order_lab";
        ecg.arguments = {{"test", "ecg"}};
        ecg.compare_args = {"test"};
        triage.required_actions = {vitals, ecg};
        triage.nl_assertions = {"chest pain"};
        triage.transition.kind = PhaseTransition::Kind::action_completed;
        triage.transition.tool_name = "order_lab";
        triage.time_pressure = true;

        PathwayPhase diagnosis;
        diagnosis.active_domain = "clinical_diagnosis";
        ExpectedAction troponin;
        troponin.tool_name = "order_lab";
        troponin.arguments = {{"test", "troponin"}};
        troponin.compare_args = {"test"};
        ExpectedAction submit;
        submit.tool_name = "submit_answer";
        diagnosis.required_actions = {troponin, submit};
        diagnosis.transition.kind = PhaseTransition::Kind::action_completed;
        diagnosis.transition.tool_name = "submit_answer";

        chest_pain.phases = {triage, diagnosis};
    }
    out.push_back(std::move(chest_pain));

    PathwaySpec sepsis;
    sepsis.name = "sepsis_bundle";
    {
        PathwayPhase screen;
        screen.active_domain = "triage_emergency";
        ExpectedAction screen_tool;
        screen_tool.tool_name = "screen_sepsis";
        screen.required_actions = {screen_tool};
        screen.nl_assertions = {"sepsis|septic"};
        screen.transition.kind = PhaseTransition::Kind::assertion_matched;
        screen.transition.pattern = "sepsis screen positive";
        screen.time_pressure = true;

        PathwayPhase bundle;
        bundle.active_domain = "clinical_diagnosis";
        ExpectedAction lactate;
        lactate.tool_name = "order_lab";
        lactate.arguments = {{"test", "lactate"}};
        lactate.compare_args = {"test"};
        ExpectedAction cultures;
        cultures.tool_name = "order_lab";
        cultures.arguments = {{"test", "blood_cultures"}};
        cultures.compare_args = {"test"};
        ExpectedAction abx;
        abx.tool_name = "prescribe";
        bundle.required_actions = {lactate, cultures, abx};
        bundle.transition.kind = PhaseTransition::Kind::action_completed;
        bundle.transition.tool_name = "submit_answer";

        sepsis.phases = {screen, bundle};
    }
    out.push_back(std::move(sepsis));
    return out;
}

std::vector<MicroClinicTask> micro_clinic_suite(std::uint64_t seed, std::size_t n) {
    if (n < 1) throw ContractError("micro_clinic_suite: n must be >= 1");

    static constexpr std::array<std::string_view, 8> kPresentations = {
        "intermittent fever and fatigue",     "productive cough and mild dyspnea",
        "epigastric pain after meals",        "recurrent headaches with photophobia",
        "joint stiffness worse in the morning", "palpitations during exertion",
        "pruritic rash on both forearms",     "dizziness when standing up",
    };
    static constexpr std::array<std::string_view, 4> kOptionPool = {
        "begin first-line therapy and reassess in two weeks",
        "order the confirmatory panel before treating",
        "refer to the relevant specialist clinic",
        "observe and schedule a follow-up visit",
    };

    std::vector<MicroClinicTask> out;
    out.reserve(n);
    Rng rng(seed ^ 0x6d6963726fULL);  // suite-level stream
    for (std::size_t i = 0; i < n; ++i) {
        const auto presentation = kPresentations[rng.uniform_int(kPresentations.size())];
        const char correct = static_cast<char>('A' + rng.uniform_int(4));

        Task t;
        t.domain = "micro_clinic";
        std::string ticket = "Case " + std::to_string(i) + ": a patient presents with ";
        ticket += presentation;
        ticket += ". Decide the best next step.\n";
        for (std::size_t o = 0; o < 4; ++o) {
            ticket += "\n";
            ticket += static_cast<char>('A' + o);
            ticket += ") ";
            ticket += kOptionPool[o];
        }
        ticket += "\n\nConsult lookup_fact and assess_case before submitting.";
        t.ticket = std::move(ticket);
        t.gold_answer = std::string(1, correct);

        ExpectedAction lookup;
        lookup.tool_name = "lookup_fact";
        lookup.arguments = {{"key", "case"}};
        ExpectedAction assess;
        assess.tool_name = "assess_case";
        ExpectedAction submit;
        submit.tool_name = "submit_answer";
        submit.arguments = {{"answer", std::string(1, correct)}};
        submit.compare_args = {"answer"};
        t.expected_actions = {lookup, assess, submit};
        t.reward_basis = {RewardBasis::action};
        t.id = task_id(t);

        MicroClinicTask mc;
        mc.correct_option = std::string(1, correct);
        mc.solution_actions = {
            R"({"name":"lookup_fact","arguments":{"key":"case"}})",
            R"({"name":"assess_case","arguments":{}})",
            std::string(R"({"name":"submit_answer","arguments":{"answer":")") + correct +
                R"("}})",
        };
        mc.task = std::move(t);
        out.push_back(std::move(mc));
    }
    return out;
}

}  // namespace clinigym
