#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace clinigym {

class KnowledgeIndex;

enum class ToolType { READ, WRITE, THINK, GENERIC };

std::string_view to_string(ToolType t);

struct ParamSpec {
    std::string name;
    std::string type = "string";  // JSON-schema scalar type
    bool required = false;
    std::string description;
};

struct ToolDefinition {
    std::string name;
    ToolType type = ToolType::READ;
    std::string description;
    std::vector<ParamSpec> parameters;
};

struct ToolResult {
    bool ok = false;
    nlohmann::json payload;
    std::string error_message;

    static ToolResult success(nlohmann::json payload);
    static ToolResult failure(std::string message);

    /// Rendering used in observations and the bridge wire format.
    std::string to_text() const;
};

struct AllergyRecord {
    std::string substance;
    int severity = 1;  // 1..5
};

struct LabResult {
    std::string name;
    double value = 0.0;
    std::string unit;
    double reference_low = 0.0;
    double reference_high = 0.0;
    std::string flag;  // "", "high", "low", "critical"
};

struct PatientRecord {
    std::string id;
    std::string name;
    int age = 0;
    std::string sex;
    std::vector<AllergyRecord> allergies;
    std::vector<std::string> conditions;
    std::vector<std::string> medications;  // active prescriptions on admission
    std::map<std::string, std::string> vitals;
    std::vector<LabResult> labs;
    std::string note;
};

struct DrugReference {
    std::string name;
    std::string drug_class;
    double typical_dose_mg = 0.0;
    std::vector<std::string> interacts_with;
};

/// Episode-local mutable state the tool handlers operate on. READ and THINK
/// dispatches must leave it unchanged; the purity tests compare state_hash()
/// before and after.
struct WorldState {
    std::string domain;
    std::vector<PatientRecord> patients;
    std::map<std::string, DrugReference> formulary;

    // micro-clinic task state
    std::map<std::string, std::string> facts;
    std::string hidden_answer;
    bool fact_looked_up = false;
    bool case_assessed = false;

    // effects of WRITE tools during the episode
    std::vector<std::string> ordered_labs;
    std::vector<std::string> prescriptions;  // "drug dose_mg" entries
    std::vector<std::string> clinical_notes;
    std::vector<std::string> mutation_log;

    std::shared_ptr<const KnowledgeIndex> knowledge;

    PatientRecord* find_patient(std::string_view id);
    const PatientRecord* find_patient(std::string_view id) const;

    /// Stable hash of the serializable state (the knowledge handle is
    /// identified by its passage ids, not its address).
    std::uint64_t state_hash() const;
};

/// Immutable-after-construction tool collection for one domain. Safe to
/// share across episodes; all mutation flows through the WorldState that
/// dispatch() receives.
class ToolKit {
public:
    using Handler = std::function<ToolResult(const nlohmann::json& args, WorldState& world)>;

    ToolKit() = default;
    explicit ToolKit(std::string domain) : domain_(std::move(domain)) {}

    /// Throws ContractError when the name is already registered.
    ToolKit& register_tool(ToolDefinition def, Handler handler);

    bool has(std::string_view name) const;
    const ToolDefinition* find(std::string_view name) const;
    std::size_t size() const { return tools_.size(); }
    const std::string& domain() const { return domain_; }

    /// Definitions in ascending name order.
    std::vector<const ToolDefinition*> definitions() const;

    /// OpenAI-style function schemas, one per tool, byte-stable ordering.
    nlohmann::json schemas() const;

    /// Soft-error execution: unknown names, bad argument shapes and handler
    /// failures all come back as ok=false results, never exceptions.
    /// Unknown argument keys are dropped with a warning in the payload;
    /// WRITE dispatches append to the world mutation log.
    ToolResult dispatch(std::string_view name, const nlohmann::json& args,
                        WorldState& world) const;

    /// First-wins merge: a name present in several kits keeps the earliest
    /// definition and handler. The merged kit reports the first domain.
    static ToolKit merge(const std::vector<ToolKit>& kits);

private:
    struct Entry {
        ToolDefinition def;
        Handler handler;
    };
    std::string domain_;
    std::map<std::string, Entry, std::less<>> tools_;
};

/// schemas() serialized with a stable two-space indent, for file export.
std::string schema_document(const ToolKit& kit);

}  // namespace clinigym
