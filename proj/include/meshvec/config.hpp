/*
 * Copyright 2026 The meshvec Authors. All rights reserved.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#pragma once

#include <meshvec/errors.hpp>

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

namespace meshvec::config {

using Json = nlohmann::json;

namespace detail {

/// Reader for the TOML subset used by run configs: tables, dotted keys,
/// strings, numbers, booleans, arrays and inline tables. Dates are not supported.
class TomlReader
{
public:
    explicit TomlReader(std::string_view text) : m_text(text) {}

    Json parse_document()
    {
        Json root = Json::object();
        Json* table = &root;
        while (true) {
            skip_ws_comments_newlines();
            if (eof()) break;
            if (peek() == '[') {
                ++m_pos;
                if (!eof() && peek() == '[') error("arrays of tables are not supported");
                skip_inline_ws();
                const auto path = parse_key_path();
                skip_inline_ws();
                expect(']');
                table = &root;
                for (const auto& k : path) {
                    Json& next = (*table)[k];
                    if (next.is_null()) next = Json::object();
                    if (!next.is_object()) error("key '" + k + "' is not a table");
                    table = &next;
                }
            } else {
                parse_key_value(*table);
            }
            end_of_line();
        }
        return root;
    }

    Json parse_single_value()
    {
        skip_inline_ws();
        Json v = parse_value();
        skip_inline_ws();
        if (!eof()) error("trailing characters after value");
        return v;
    }

private:
    [[noreturn]] void error(const std::string& msg) const
    {
        int line = 1;
        for (std::size_t i = 0; i < m_pos && i < m_text.size(); ++i) line += m_text[i] == '\n';
        fail(ErrorCode::ConfigError, "TOML line " + std::to_string(line) + ": " + msg);
    }

    bool eof() const { return m_pos >= m_text.size(); }
    char peek() const { return m_text[m_pos]; }

    void expect(char c)
    {
        if (eof() || peek() != c) error(std::string("expected '") + c + "'");
        ++m_pos;
    }

    void skip_inline_ws()
    {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++m_pos;
    }

    void skip_comment()
    {
        if (!eof() && peek() == '#')
            while (!eof() && peek() != '\n') ++m_pos;
    }

    void skip_ws_comments_newlines()
    {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') ++m_pos;
            else if (c == '#') skip_comment();
            else break;
        }
    }

    void end_of_line()
    {
        skip_inline_ws();
        skip_comment();
        if (!eof() && peek() == '\r') ++m_pos;
        if (!eof() && peek() != '\n') error("expected end of line");
    }

    std::string parse_key()
    {
        if (!eof() && (peek() == '"' || peek() == '\'')) return parse_string();
        const auto start = m_pos;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++m_pos;
        if (m_pos == start) error("expected a key");
        return std::string(m_text.substr(start, m_pos - start));
    }

    std::vector<std::string> parse_key_path()
    {
        std::vector<std::string> path{parse_key()};
        skip_inline_ws();
        while (!eof() && peek() == '.') {
            ++m_pos;
            skip_inline_ws();
            path.push_back(parse_key());
            skip_inline_ws();
        }
        return path;
    }

    void parse_key_value(Json& table)
    {
        const auto path = parse_key_path();
        skip_inline_ws();
        expect('=');
        skip_inline_ws();
        Json* target = &table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            Json& next = (*target)[path[i]];
            if (next.is_null()) next = Json::object();
            if (!next.is_object()) error("key '" + path[i] + "' is not a table");
            target = &next;
        }
        if (target->contains(path.back())) error("duplicate key '" + path.back() + "'");
        (*target)[path.back()] = parse_value();
    }

    std::string parse_string()
    {
        const char quote = peek();
        ++m_pos;
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') error("unterminated string");
            const char c = peek();
            ++m_pos;
            if (c == quote) break;
            if (c == '\\' && quote == '"') {
                if (eof()) error("unterminated escape");
                const char e = peek();
                ++m_pos;
                switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: error(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
        return out;
    }

    Json parse_array()
    {
        expect('[');
        Json arr = Json::array();
        while (true) {
            skip_ws_comments_newlines();
            if (eof()) error("unterminated array");
            if (peek() == ']') {
                ++m_pos;
                return arr;
            }
            arr.push_back(parse_value());
            skip_ws_comments_newlines();
            if (!eof() && peek() == ',') {
                ++m_pos;
                continue;
            }
            skip_ws_comments_newlines();
            expect(']');
            return arr;
        }
    }

    Json parse_inline_table()
    {
        expect('{');
        Json t = Json::object();
        skip_inline_ws();
        if (!eof() && peek() == '}') {
            ++m_pos;
            return t;
        }
        while (true) {
            skip_inline_ws();
            parse_key_value(t);
            skip_inline_ws();
            if (!eof() && peek() == ',') {
                ++m_pos;
                continue;
            }
            expect('}');
            return t;
        }
    }

    Json parse_value()
    {
        if (eof()) error("expected a value");
        const char c = peek();
        if (c == '"' || c == '\'') return parse_string();
        if (c == '[') return parse_array();
        if (c == '{') return parse_inline_table();
        const auto start = m_pos;
        while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
               peek() != '}' && peek() != '#')
            ++m_pos;
        std::string tok(m_text.substr(start, m_pos - start));
        if (tok == "true") return true;
        if (tok == "false") return false;
        std::string num;
        for (char ch : tok)
            if (ch != '_') num += ch;
        std::string body = num;
        double sign = 1.0;
        if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
            sign = body[0] == '-' ? -1.0 : 1.0;
            body.erase(0, 1);
        }
        if (body == "inf") return sign * std::numeric_limits<double>::infinity();
        if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
        const bool is_float = num.find_first_of(".eE") != std::string::npos;
        if (!is_float) {
            long long i = 0;
            const auto r = std::from_chars(num.data() + (num[0] == '+'), num.data() + num.size(), i);
            if (r.ec == std::errc() && r.ptr == num.data() + num.size()) return i;
        } else {
            double d = 0.0;
            const auto r = std::from_chars(num.data() + (num[0] == '+'), num.data() + num.size(), d);
            if (r.ec == std::errc() && r.ptr == num.data() + num.size()) return d;
        }
        error("cannot parse value '" + tok + "'");
    }

    std::string_view m_text;
    std::size_t m_pos = 0;
};

} // namespace detail

inline Json parse_toml(std::string_view text)
{
    return detail::TomlReader(text).parse_document();
}

/// Loads a run config: `.json` files as JSON, anything else as TOML.
inline Json load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ConfigError, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (path.extension() == ".json") {
        try {
            return Json::parse(text);
        } catch (const Json::exception& e) {
            fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
        }
    }
    return parse_toml(text);
}

/// Applies `dotted.key=value`; the value is read as a TOML value, falling
/// back to a bare string.
inline void apply_override(Json& root, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) fail(ErrorCode::ConfigError, "override must be key=value");
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    Json value;
    try {
        value = detail::TomlReader(text).parse_single_value();
    } catch (const Error&) {
        value = text;
    }
    Json* target = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) fail(ErrorCode::ConfigError, "bad override key: " + key);
        if (dot == std::string::npos) {
            (*target)[part] = value;
            return;
        }
        Json& next = (*target)[part];
        if (next.is_null()) next = Json::object();
        if (!next.is_object()) fail(ErrorCode::ConfigError, "override path crosses a non-table: " + key);
        target = &next;
        start = dot + 1;
    }
}

} // namespace meshvec::config
