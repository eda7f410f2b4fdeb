#pragma once

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fmom::cli {

/// CLI11 config reader for JSON files. Top-level keys set global flags; an
/// object under a subcommand name sets that subcommand's flags:
///   {"seed": 42, "sweep": {"input": "factors.csv", "m": "1..6"}}
/// Values given on the command line take precedence.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        return to_json(app, default_also).dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(input);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError("--config: invalid JSON: " + std::string(e.what()));
        }
        if (!j.is_object()) throw CLI::ConversionError("--config: top level must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static void collect(const nlohmann::json& j, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& items) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto nested = parents;
                nested.push_back(key);
                collect(value, nested, items);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v));
            } else {
                item.inputs.push_back(scalar(value));
            }
            items.push_back(std::move(item));
        }
    }

    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number() || v.is_null()) return v.dump();
        throw CLI::ConversionError("--config: nested arrays are not supported");
    }

    static nlohmann::json to_json(const CLI::App* app, bool default_also) {
        nlohmann::json out = nlohmann::json::object();
        for (const CLI::Option* opt : app->get_options()) {
            if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
            const auto& name = opt->get_lnames().front();
            if (opt->count() > 0) {
                const auto& results = opt->results();
                out[name] = results.size() == 1 ? nlohmann::json(results.front()) : nlohmann::json(results);
            } else if (default_also && !opt->get_default_str().empty()) {
                out[name] = opt->get_default_str();
            }
        }
        for (const CLI::App* sub : app->get_subcommands({})) {
            auto nested = to_json(sub, default_also);
            if (!nested.empty()) out[sub->get_name()] = std::move(nested);
        }
        return out;
    }
};

}  // namespace fmom::cli
