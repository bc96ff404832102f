#include "toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "dsoup/errors.hpp"

namespace dsoup::cli {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
    throw FormatError("config line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// strip a trailing comment, respecting quoted strings
std::string_view strip_comment(std::string_view s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    return s;
}

bool bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::vector<std::string> split_dotted(std::string_view s, int line) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == '.') {
            if (cur.empty()) fail(line, "empty key segment");
            parts.push_back(std::move(cur));
            cur.clear();
        } else if (bare_key_char(c)) {
            cur.push_back(c);
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            continue;
        } else {
            fail(line, std::string("unsupported character '") + c + "' in key");
        }
    }
    if (cur.empty()) fail(line, "empty key segment");
    parts.push_back(std::move(cur));
    return parts;
}

class ValueParser {
public:
    ValueParser(std::string_view text, int line) : s_(text), line_(line) {}

    nlohmann::json parse() {
        nlohmann::json v = value();
        skip_ws();
        if (pos_ != s_.size()) fail(line_, "trailing characters after value");
        return v;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    nlohmann::json value() {
        skip_ws();
        if (pos_ >= s_.size()) fail(line_, "missing value");
        char c = s_[pos_];
        if (c == '"') return string_value();
        if (c == '[') return array_value();
        if (s_.compare(pos_, 4, "true") == 0 && boundary(pos_ + 4)) {
            pos_ += 4;
            return true;
        }
        if (s_.compare(pos_, 5, "false") == 0 && boundary(pos_ + 5)) {
            pos_ += 5;
            return false;
        }
        return number_value();
    }

    bool boundary(std::size_t p) const {
        return p >= s_.size() || !bare_key_char(s_[p]);
    }

    nlohmann::json string_value() {
        ++pos_;  // opening quote
        std::string out;
        while (pos_ < s_.size()) {
            char c = s_[pos_++];
            if (c == '"') return out;
            if (c == '\\') {
                if (pos_ >= s_.size()) fail(line_, "dangling escape");
                char e = s_[pos_++];
                switch (e) {
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case 'r': out.push_back('\r'); break;
                    default: fail(line_, std::string("unsupported escape \\") + e);
                }
            } else {
                out.push_back(c);
            }
        }
        fail(line_, "unterminated string");
    }

    nlohmann::json array_value() {
        ++pos_;  // '['
        nlohmann::json arr = nlohmann::json::array();
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return arr;
        }
        while (true) {
            arr.push_back(value());
            skip_ws();
            if (pos_ >= s_.size()) fail(line_, "unterminated array");
            if (s_[pos_] == ',') {
                ++pos_;
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == ']') {  // trailing comma
                    ++pos_;
                    return arr;
                }
                continue;
            }
            if (s_[pos_] == ']') {
                ++pos_;
                return arr;
            }
            fail(line_, "expected ',' or ']' in array");
        }
    }

    nlohmann::json number_value() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                    s_[pos_] == '+' || s_[pos_] == '-' || s_[pos_] == '.'))
            ++pos_;
        std::string tok(s_.substr(start, pos_ - start));
        if (tok.empty()) fail(line_, "expected a value");
        // underscores are TOML digit separators
        std::erase(tok, '_');
        bool floaty = tok.find_first_of(".eE") != std::string::npos;
        if (!floaty) {
            std::int64_t iv = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
            if (ec == std::errc() && p == tok.data() + tok.size()) return iv;
        }
        double dv = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
        if (ec != std::errc() || p != tok.data() + tok.size())
            fail(line_, "bad number '" + tok + "'");
        return dv;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_;
};

// walk a dotted path, descending into the newest element of any array met
nlohmann::json* navigate(nlohmann::json* node, const std::vector<std::string>& parts,
                         std::size_t count, int line) {
    for (std::size_t i = 0; i < count; ++i) {
        nlohmann::json& child = (*node)[parts[i]];
        if (child.is_null()) child = nlohmann::json::object();
        if (child.is_array()) {
            if (child.empty() || !child.back().is_object())
                fail(line, "key '" + parts[i] + "' is not a table array");
            node = &child.back();
        } else if (child.is_object()) {
            node = &child;
        } else {
            fail(line, "key '" + parts[i] + "' already holds a value");
        }
    }
    return node;
}

}  // namespace

nlohmann::json parse_toml_lite(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        int first_line = line_no;
        std::string_view line = trim(strip_comment(raw));
        if (line.empty()) continue;

        if (line.front() == '[') {
            bool table_array = line.size() > 1 && line[1] == '[';
            std::string_view inner = line;
            inner.remove_prefix(table_array ? 2 : 1);
            if (table_array) {
                if (inner.size() < 2 || inner.substr(inner.size() - 2) != "]]")
                    fail(first_line, "malformed table-array header");
                inner.remove_suffix(2);
            } else {
                if (inner.empty() || inner.back() != ']')
                    fail(first_line, "malformed table header");
                inner.remove_suffix(1);
            }
            auto parts = split_dotted(trim(inner), first_line);
            nlohmann::json* parent = navigate(&root, parts, parts.size() - 1, first_line);
            nlohmann::json& slot = (*parent)[parts.back()];
            if (table_array) {
                if (slot.is_null()) slot = nlohmann::json::array();
                if (!slot.is_array()) fail(first_line, "'" + parts.back() + "' is not an array");
                slot.push_back(nlohmann::json::object());
                current = &slot.back();
            } else {
                if (slot.is_null()) slot = nlohmann::json::object();
                if (!slot.is_object()) fail(first_line, "'" + parts.back() + "' is not a table");
                current = &slot;
            }
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(first_line, "expected 'key = value'");
        auto parts = split_dotted(trim(line.substr(0, eq)), first_line);
        std::string value_text(trim(line.substr(eq + 1)));
        if (value_text.empty()) fail(first_line, "missing value");

        // multi-line arrays: keep appending lines until brackets balance
        auto depth = [](std::string_view s) {
            int d = 0;
            bool in_str = false;
            for (std::size_t i = 0; i < s.size(); ++i) {
                char c = s[i];
                if (in_str) {
                    if (c == '\\') ++i;
                    else if (c == '"') in_str = false;
                } else if (c == '"') in_str = true;
                else if (c == '[') ++d;
                else if (c == ']') --d;
            }
            return d;
        };
        int d = depth(value_text);
        while (d > 0 && std::getline(in, raw)) {
            ++line_no;
            std::string_view more = trim(strip_comment(raw));
            value_text += ' ';
            value_text += more;
            d += depth(more);
        }
        if (d != 0) fail(first_line, "unbalanced brackets");

        nlohmann::json* parent = navigate(current, parts, parts.size() - 1, first_line);
        if (parent->contains(parts.back()))
            fail(first_line, "duplicate key '" + parts.back() + "'");
        (*parent)[parts.back()] = ValueParser(value_text, first_line).parse();
    }
    return root;
}

nlohmann::json parse_toml_lite_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_toml_lite(ss.str());
}

}  // namespace dsoup::cli
