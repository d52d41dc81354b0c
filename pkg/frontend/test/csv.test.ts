import assert from "node:assert/strict";
import { test } from "node:test";

import { SchemaError, parseCsv, toNumber } from "../src/csv.js";

test("parses header and rows", () => {
  const rows = parseCsv("a,b,c\n1,2,3\n4,5,6\n", ["a", "b", "c"]);
  assert.equal(rows.length, 2);
  assert.deepEqual(rows[0], { a: "1", b: "2", c: "3" });
});

test("missing column error names the column", () => {
  assert.throws(
    () => parseCsv("a,b\n1,2\n", ["a", "b", "modularity"]),
    (err: Error) =>
      err instanceof SchemaError && err.message.includes("'modularity'"),
  );
});

test("ragged row error names the line", () => {
  assert.throws(
    () => parseCsv("a,b\n1,2\n1\n", ["a", "b"]),
    (err: Error) => err instanceof SchemaError && err.message.includes("line 3"),
  );
});

test("empty file rejected", () => {
  assert.throws(() => parseCsv("", ["a"]), SchemaError);
});

test("extra columns are tolerated", () => {
  const rows = parseCsv("a,b,extra\n1,2,3\n", ["a", "b"]);
  assert.equal(rows[0].extra, "3");
});

test("toNumber rejects non-numeric values with context", () => {
  const rows = parseCsv("a\nferret\n", ["a"]);
  assert.throws(
    () => toNumber(rows[0], "a", 2),
    (err: Error) =>
      err instanceof SchemaError &&
      err.message.includes("line 2") &&
      err.message.includes("'a'"),
  );
});
