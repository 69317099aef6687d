// Copyright (c) colorgo-mini contributors.
// SPDX-License-Identifier: Apache-2.0
#include "colorgo/parser.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>

namespace colorgo {

namespace {

struct Token {
    enum class Kind { Ident, Number, Punct, FuncRef, Loc, End };
    Kind kind = Kind::End;
    std::string text;   // Ident/FuncRef (name without @)
    int64_t number = 0; // Number
    char punct = 0;     // Punct: one of ( ) { } , : =
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        skip_ws_and_comments();
        Token t;
        t.line = line_;
        t.col = col_;
        if (eof()) {
            t.kind = Token::Kind::End;
            return t;
        }
        char c = peek();
        if (c == '\n') {
            advance();
            return next();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return lex_ident(t);
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))))
            return lex_number(t);
        if (c == '\'')
            return lex_char(t);
        if (c == '@') {
            advance();
            if (eof() || !(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_'))
                fail("expected function name after '@'", t.line, t.col);
            Token name = lex_ident(t);
            name.kind = Token::Kind::FuncRef;
            return name;
        }
        if (c == '!') {
            // only "!loc" exists
            size_t save = pos_;
            advance();
            std::string word;
            while (!eof() && std::isalpha(static_cast<unsigned char>(peek())))
                word.push_back(take());
            if (word != "loc") {
                pos_ = save;
                fail("unknown directive '!" + word + "'", t.line, t.col);
            }
            t.kind = Token::Kind::Loc;
            return t;
        }
        if (std::string("(){},:=").find(c) != std::string::npos) {
            t.kind = Token::Kind::Punct;
            t.punct = c;
            advance();
            return t;
        }
        fail(std::string("unexpected character '") + c + "'", t.line, t.col);
        return t;
    }

    // The !loc payload is FILE:LINE where FILE may contain dots; lex it raw.
    SourceLoc lex_loc_payload() {
        skip_spaces_only();
        int sline = line_, scol = col_;
        std::string file;
        while (!eof() && peek() != ':' && peek() != '\n' && peek() != ' ' && peek() != '\t')
            file.push_back(take());
        if (file.empty() || eof() || peek() != ':')
            fail("expected FILE:LINE after !loc", sline, scol);
        advance(); // ':'
        std::string num;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek())))
            num.push_back(take());
        if (num.empty())
            fail("expected line number after !loc", line_, col_);
        SourceLoc loc;
        loc.file = file;
        loc.line = std::stoi(num);
        if (loc.line < 1)
            fail("source line must be >= 1", sline, scol);
        return loc;
    }

    bool at_line_end() {
        skip_spaces_only();
        return eof() || peek() == '\n' || peek() == ';';
    }

    void expect_line_end() {
        skip_ws_and_comments_no_newline();
        if (!eof() && peek() != '\n')
            fail("trailing tokens at end of line", line_, col_);
    }

    int line() const { return line_; }
    int col() const { return col_; }

    [[noreturn]] void fail(const std::string& msg, int l, int c) { throw ParseError(msg, l, c); }

private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    char take() {
        char c = text_[pos_];
        advance();
        return c;
    }
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_spaces_only() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r'))
            advance();
    }

    void skip_comment() {
        while (!eof() && peek() != '\n')
            advance();
    }

    void skip_ws_and_comments() {
        for (;;) {
            skip_spaces_only();
            if (!eof() && peek() == ';') {
                skip_comment();
                continue;
            }
            if (!eof() && peek() == '\n') {
                advance();
                continue;
            }
            break;
        }
    }

    void skip_ws_and_comments_no_newline() {
        skip_spaces_only();
        if (!eof() && peek() == ';')
            skip_comment();
    }

    Token lex_ident(Token t) {
        t.kind = Token::Kind::Ident;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '.'))
            t.text.push_back(take());
        return t;
    }

    Token lex_number(Token t) {
        t.kind = Token::Kind::Number;
        bool neg = false;
        if (peek() == '-') {
            neg = true;
            advance();
        }
        std::string digits;
        if (!eof() && peek() == '0' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == 'x' || text_[pos_ + 1] == 'X')) {
            advance();
            advance();
            while (!eof() && std::isxdigit(static_cast<unsigned char>(peek())))
                digits.push_back(take());
            if (digits.empty())
                fail("malformed hex literal", t.line, t.col);
            t.number = static_cast<int64_t>(std::stoull(digits, nullptr, 16));
        } else {
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek())))
                digits.push_back(take());
            t.number = static_cast<int64_t>(std::stoll(digits));
        }
        if (neg)
            t.number = -t.number;
        return t;
    }

    Token lex_char(Token t) {
        t.kind = Token::Kind::Number;
        advance(); // opening quote
        if (eof())
            fail("unterminated character literal", t.line, t.col);
        char c = take();
        if (c == '\\') {
            if (eof())
                fail("unterminated escape", t.line, t.col);
            char e = take();
            switch (e) {
            case '0': c = '\0'; break;
            case 'n': c = '\n'; break;
            case 't': c = '\t'; break;
            case '\\': c = '\\'; break;
            case '\'': c = '\''; break;
            default: fail(std::string("unknown escape '\\") + e + "'", t.line, t.col);
            }
        }
        if (eof() || peek() != '\'')
            fail("unterminated character literal", t.line, t.col);
        advance();
        t.number = static_cast<unsigned char>(c);
        return t;
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

const std::set<std::string> kKeywords = {
    "fn",   "nosym", "const", "add",  "sub",   "mul",   "udiv",    "and",
    "or",   "xor",   "shl",   "lshr", "icmp",  "load",  "store",   "alloca",
    "inb",  "inw",   "call",  "icall", "funcaddr", "ret", "br_cond", "br",
    "switch", "abort", "nop",
};

const std::map<std::string, Opcode> kSimpleOps = {
    {"add", Opcode::Add},   {"sub", Opcode::Sub},   {"mul", Opcode::Mul},
    {"udiv", Opcode::UDiv}, {"and", Opcode::And},   {"or", Opcode::Or},
    {"xor", Opcode::Xor},   {"shl", Opcode::Shl},   {"lshr", Opcode::LShr},
};

const std::map<std::string, Opcode> kIcmpOps = {
    {"eq", Opcode::IcmpEq},   {"ne", Opcode::IcmpNe},   {"ult", Opcode::IcmpUlt},
    {"ule", Opcode::IcmpUle}, {"slt", Opcode::IcmpSlt}, {"sle", Opcode::IcmpSle},
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) { bump(); }

    Program parse() {
        Program p;
        while (cur_.kind != Token::Kind::End) {
            expect_keyword("fn");
            parse_function(p);
        }
        if (p.functions.empty())
            throw ParseError("empty program", 1, 1);
        auto it = p.function_index.find(p.entry);
        if (it == p.function_index.end())
            throw ParseError("entry function '" + p.entry + "' not defined", 1, 1);
        p.entry_fn = it->second;
        resolve_and_validate(p);
        return p;
    }

private:
    void bump() { cur_ = lex_.next(); }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, cur_.line, cur_.col); }

    bool is_keyword(const std::string& kw) const {
        return cur_.kind == Token::Kind::Ident && cur_.text == kw;
    }

    void expect_keyword(const std::string& kw) {
        if (!is_keyword(kw))
            fail("expected '" + kw + "'");
        bump();
    }

    void expect_punct(char c) {
        if (cur_.kind != Token::Kind::Punct || cur_.punct != c)
            fail(std::string("expected '") + c + "'");
        bump();
    }

    bool accept_punct(char c) {
        if (cur_.kind == Token::Kind::Punct && cur_.punct == c) {
            bump();
            return true;
        }
        return false;
    }

    std::string expect_ident(const char* what) {
        if (cur_.kind != Token::Kind::Ident)
            fail(std::string("expected ") + what);
        if (kKeywords.count(cur_.text))
            fail("'" + cur_.text + "' is a reserved word");
        std::string s = cur_.text;
        bump();
        return s;
    }

    // Function names follow "fn" or "@", where no opcode can appear, so
    // keywords like "add" are fine there.
    std::string expect_function_name() {
        if (cur_.kind != Token::Kind::Ident)
            fail("expected function name");
        std::string s = cur_.text;
        bump();
        return s;
    }

    int64_t expect_number(const char* what) {
        if (cur_.kind != Token::Kind::Number)
            fail(std::string("expected ") + what);
        int64_t v = cur_.number;
        bump();
        return v;
    }

    int reg_index(FunctionDef& f, const std::string& name, bool define) {
        for (size_t i = 0; i < f.registers.size(); ++i)
            if (f.registers[i] == name)
                return static_cast<int>(i);
        if (!define)
            return -1;
        f.registers.push_back(name);
        return static_cast<int>(f.registers.size() - 1);
    }

    Operand parse_operand(FunctionDef& f) {
        if (cur_.kind == Token::Kind::Number) {
            int64_t v = cur_.number;
            bump();
            return Operand::make_imm(v);
        }
        std::string name = expect_ident("register or immediate");
        return Operand::make_reg(reg_index(f, name, true), name);
    }

    void parse_function(Program& p) {
        int fline = cur_.line, fcol = cur_.col;
        std::string name = expect_function_name();
        if (p.function_index.count(name))
            throw ParseError("duplicate function '" + name + "'", fline, fcol);
        FunctionDef f;
        f.name = name;
        expect_punct('(');
        if (!accept_punct(')')) {
            for (;;) {
                std::string param = expect_ident("parameter name");
                if (reg_index(f, param, false) >= 0)
                    fail("duplicate parameter '" + param + "'");
                f.params.push_back(param);
                f.registers.push_back(param);
                if (accept_punct(')'))
                    break;
                expect_punct(',');
            }
        }
        if (is_keyword("nosym")) {
            f.nosym = true;
            bump();
        }
        expect_punct('{');
        while (!accept_punct('}'))
            parse_block_or_instr(f);
        if (f.blocks.empty())
            throw ParseError("function '" + name + "' has no blocks", fline, fcol);
        for (auto& b : f.blocks) {
            if (b.instrs.empty())
                throw ParseError("block '" + b.label + "' in '" + name + "' is empty", fline, fcol);
            for (size_t i = 0; i + 1 < b.instrs.size(); ++i)
                if (is_terminator(b.instrs[i].op))
                    throw ParseError("terminator before end of block '" + b.label + "' in '" + name + "'",
                                     fline, fcol);
            if (!is_terminator(b.instrs.back().op))
                throw ParseError("block '" + b.label + "' in '" + name + "' lacks a terminator", fline, fcol);
        }
        f.entry_block = 0;
        p.function_index[f.name] = static_cast<int>(p.functions.size());
        p.functions.push_back(std::move(f));
    }

    void parse_block_or_instr(FunctionDef& f) {
        if (cur_.kind != Token::Kind::Ident)
            fail("expected label or instruction");
        // A label is IDENT ':' ; look ahead by re-lexing is avoided by
        // treating any non-opcode identifier followed by ':' as a label.
        std::string word = cur_.text;
        int wline = cur_.line, wcol = cur_.col;
        if (!kKeywords.count(word)) {
            // could be a label or "dst = op"
            bump();
            if (cur_.kind == Token::Kind::Punct && cur_.punct == ':') {
                bump();
                if (f.block_index.count(word))
                    throw ParseError("duplicate label '" + word + "'", wline, wcol);
                f.block_index[word] = static_cast<int>(f.blocks.size());
                BasicBlock b;
                b.label = word;
                f.blocks.push_back(std::move(b));
                return;
            }
            if (cur_.kind == Token::Kind::Punct && cur_.punct == '=') {
                bump();
                if (f.blocks.empty())
                    throw ParseError("instruction before first label", wline, wcol);
                Instruction in = parse_instruction(f, word, wline, wcol);
                f.blocks.back().instrs.push_back(std::move(in));
                end_instruction_line(wline);
                return;
            }
            throw ParseError("expected ':' or '=' after '" + word + "'", wline, wcol);
        }
        bump();
        if (f.blocks.empty())
            throw ParseError("instruction before first label", wline, wcol);
        Instruction in = parse_instruction_opcode(f, word, "", wline, wcol);
        f.blocks.back().instrs.push_back(std::move(in));
        end_instruction_line(wline);
    }

    // One instruction per line: the next token must start a new line (or
    // close the function).
    void end_instruction_line(int line) {
        if (cur_.kind == Token::Kind::End)
            return;
        if (cur_.kind == Token::Kind::Punct && cur_.punct == '}')
            return;
        if (cur_.line == line)
            fail("expected end of line after instruction");
    }

    Instruction parse_instruction(FunctionDef& f, const std::string& dst, int line, int col) {
        if (cur_.kind != Token::Kind::Ident || !kKeywords.count(cur_.text))
            fail("expected opcode");
        std::string opword = cur_.text;
        bump();
        return parse_instruction_opcode(f, opword, dst, line, col);
    }

    Instruction parse_instruction_opcode(FunctionDef& f, const std::string& opword,
                                         const std::string& dst, int line, int col) {
        Instruction in;
        in.src_line = line;
        in.src_col = col;
        auto set_dst = [&] {
            if (dst.empty())
                throw ParseError("'" + opword + "' requires a destination register", line, col);
            in.dst = reg_index(f, dst, true);
            in.dst_name = dst;
        };
        auto no_dst = [&] {
            if (!dst.empty())
                throw ParseError("'" + opword + "' has no result", line, col);
        };

        if (opword == "const") {
            in.op = Opcode::Const;
            set_dst();
            in.args.push_back(Operand::make_imm(expect_number("immediate")));
        } else if (auto it = kSimpleOps.find(opword); it != kSimpleOps.end()) {
            in.op = it->second;
            set_dst();
            in.args.push_back(parse_operand(f));
            expect_punct(',');
            in.args.push_back(parse_operand(f));
        } else if (opword == "icmp") {
            if (cur_.kind != Token::Kind::Ident || !kIcmpOps.count(cur_.text))
                fail("expected comparison kind (eq/ne/ult/ule/slt/sle)");
            in.op = kIcmpOps.at(cur_.text);
            bump();
            set_dst();
            in.args.push_back(parse_operand(f));
            expect_punct(',');
            in.args.push_back(parse_operand(f));
        } else if (opword == "load") {
            in.op = Opcode::Load;
            set_dst();
            in.args.push_back(parse_operand(f));
            expect_punct(',');
            int64_t sz = expect_number("access size");
            if (sz != 1 && sz != 4)
                throw ParseError("load size must be 1 or 4", line, col);
            in.mem_size = static_cast<uint32_t>(sz);
        } else if (opword == "store") {
            in.op = Opcode::Store;
            no_dst();
            in.args.push_back(parse_operand(f));
            expect_punct(',');
            in.args.push_back(parse_operand(f));
            expect_punct(',');
            int64_t sz = expect_number("access size");
            if (sz != 1 && sz != 4)
                throw ParseError("store size must be 1 or 4", line, col);
            in.mem_size = static_cast<uint32_t>(sz);
        } else if (opword == "alloca") {
            in.op = Opcode::Alloca;
            set_dst();
            int64_t n = expect_number("allocation size");
            if (n <= 0)
                throw ParseError("alloca size must be positive", line, col);
            in.args.push_back(Operand::make_imm(n));
        } else if (opword == "inb" || opword == "inw") {
            in.op = opword == "inb" ? Opcode::Inb : Opcode::Inw;
            set_dst();
            int64_t off = expect_number("input byte offset");
            if (off < 0)
                throw ParseError("input offset must be non-negative", line, col);
            in.args.push_back(Operand::make_imm(off));
        } else if (opword == "call") {
            in.op = Opcode::Call;
            if (!dst.empty()) {
                in.dst = reg_index(f, dst, true);
                in.dst_name = dst;
            }
            if (cur_.kind != Token::Kind::FuncRef)
                fail("expected @function");
            in.callee = cur_.text;
            bump();
            while (accept_punct(','))
                in.args.push_back(parse_operand(f));
        } else if (opword == "icall") {
            in.op = Opcode::Icall;
            if (!dst.empty()) {
                in.dst = reg_index(f, dst, true);
                in.dst_name = dst;
            }
            in.args.push_back(parse_operand(f));
            if (!in.args[0].is_reg())
                throw ParseError("icall target must be a register", line, col);
            while (accept_punct(','))
                in.args.push_back(parse_operand(f));
        } else if (opword == "funcaddr") {
            in.op = Opcode::Funcaddr;
            set_dst();
            if (cur_.kind != Token::Kind::FuncRef)
                fail("expected @function");
            in.callee = cur_.text;
            bump();
        } else if (opword == "ret") {
            in.op = Opcode::Ret;
            no_dst();
            if (!lex_at_operand_end(line))
                in.args.push_back(parse_operand(f));
        } else if (opword == "br_cond") {
            in.op = Opcode::BrCond;
            no_dst();
            in.args.push_back(parse_operand(f));
            expect_punct(',');
            in.label_a_name = expect_ident("label");
            expect_punct(',');
            in.label_b_name = expect_ident("label");
        } else if (opword == "br") {
            in.op = Opcode::Br;
            no_dst();
            in.label_a_name = expect_ident("label");
        } else if (opword == "switch") {
            in.op = Opcode::Switch;
            no_dst();
            in.args.push_back(parse_operand(f));
            expect_punct(',');
            in.label_a_name = expect_ident("default label");
            std::set<uint32_t> seen;
            while (accept_punct(',')) {
                SwitchCase c;
                c.value = static_cast<uint32_t>(expect_number("case value"));
                if (!seen.insert(c.value).second)
                    throw ParseError("duplicate switch case value", line, col);
                expect_punct(':');
                c.label_name = expect_ident("case label");
                in.cases.push_back(std::move(c));
            }
        } else if (opword == "abort") {
            in.op = Opcode::Abort;
            no_dst();
        } else if (opword == "nop") {
            in.op = Opcode::Nop;
            no_dst();
        } else {
            throw ParseError("unknown opcode '" + opword + "'", line, col);
        }

        if (cur_.kind == Token::Kind::Loc && cur_.line == line)
            bump_loc(in);
        return in;
    }

    // After "ret" we must distinguish "ret" from "ret r1"; an operand has to
    // sit on the same source line as the opcode.
    bool lex_at_operand_end(int line) {
        if (cur_.line != line)
            return true;
        if (cur_.kind == Token::Kind::Number)
            return false;
        if (cur_.kind == Token::Kind::Ident && !kKeywords.count(cur_.text))
            return false;
        return true;
    }

    void bump_loc(Instruction& in) {
        // cur_ is the Loc token; the payload follows in the raw stream.
        in.loc = lex_.lex_loc_payload();
        bump();
    }

    void resolve_and_validate(Program& p) {
        int site = 0;
        for (auto& f : p.functions) {
            for (auto& b : f.blocks) {
                for (auto& in : b.instrs) {
                    switch (in.op) {
                    case Opcode::Alloca:
                        in.alloca_site = site++;
                        break;
                    case Opcode::Call: {
                        auto it = p.function_index.find(in.callee);
                        if (it != p.function_index.end()) {
                            in.callee_fn = it->second;
                            size_t want = p.functions[it->second].params.size();
                            if (in.args.size() != want)
                                throw ParseError("call to '" + in.callee + "' passes " +
                                                     std::to_string(in.args.size()) + " args, expected " +
                                                     std::to_string(want),
                                                 in.src_line, in.src_col);
                        } else if (is_model_name(in.callee)) {
                            in.callee_fn = -1;
                            if (static_cast<int>(in.args.size()) != model_arity(in.callee))
                                throw ParseError("call to model '" + in.callee + "' passes " +
                                                     std::to_string(in.args.size()) + " args, expected " +
                                                     std::to_string(model_arity(in.callee)),
                                                 in.src_line, in.src_col);
                        } else {
                            throw ParseError("call to unknown function '" + in.callee + "'",
                                             in.src_line, in.src_col);
                        }
                        break;
                    }
                    case Opcode::Funcaddr: {
                        auto it = p.function_index.find(in.callee);
                        if (it == p.function_index.end())
                            throw ParseError("funcaddr of unknown function '" + in.callee + "'",
                                             in.src_line, in.src_col);
                        in.callee_fn = it->second;
                        break;
                    }
                    case Opcode::BrCond:
                        in.label_a = resolve_label(f, in.label_a_name, in);
                        in.label_b = resolve_label(f, in.label_b_name, in);
                        break;
                    case Opcode::Br:
                        in.label_a = resolve_label(f, in.label_a_name, in);
                        break;
                    case Opcode::Switch:
                        in.label_a = resolve_label(f, in.label_a_name, in);
                        for (auto& c : in.cases)
                            c.label = resolve_label(f, c.label_name, in);
                        break;
                    default:
                        break;
                    }
                }
            }
        }
        p.alloca_site_count = site;
    }

    int resolve_label(const FunctionDef& f, const std::string& name, const Instruction& in) {
        auto it = f.block_index.find(name);
        if (it == f.block_index.end())
            throw ParseError("unknown label '" + name + "' in function '" + f.name + "'",
                             in.src_line, in.src_col);
        return it->second;
    }

    Lexer lex_;
    Token cur_;
};

} // namespace

Program parse_program(std::string_view text) {
    Parser parser(text);
    return parser.parse();
}

} // namespace colorgo
