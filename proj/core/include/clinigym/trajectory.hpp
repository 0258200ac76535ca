#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace clinigym {

enum class ActionKind { tool_call, free_text };
enum class TerminationKind { submit, turn_limit, context_limit };

std::string_view to_string(ActionKind k);
std::string_view to_string(TerminationKind t);
TerminationKind termination_from_string(std::string_view s);

struct AgentAction {
    ActionKind kind = ActionKind::free_text;
    std::string tool_name;        // non-empty iff kind == tool_call
    nlohmann::json arguments;     // object iff kind == tool_call
    std::string raw_text;
    std::vector<int> token_ids;   // present when a tokenizing policy produced it

    bool is_tool(std::string_view name) const {
        return kind == ActionKind::tool_call && tool_name == name;
    }
};

struct TurnRecord {
    int turn_index = 0;
    AgentAction action;
    std::string tool_result_text;
    std::vector<double> per_token_logprobs;  // nats; may be empty
    std::size_t token_count = 0;             // |a_t|
};

struct Trajectory {
    std::string task_id;
    std::vector<TurnRecord> turns;
    TerminationKind terminated_by = TerminationKind::turn_limit;
    std::optional<std::string> final_answer;
    std::size_t total_response_tokens = 0;  // L = sum of turn token counts
};

}  // namespace clinigym
