// Minimal JSON Schema checker covering the subset the service's published
// scenario schema uses (type, properties, required, additionalProperties,
// items, minItems/maxItems, enum, minimum, minLength). Returns a list of
// human-readable violations; empty list means valid.

type Json = unknown;

interface SchemaNode {
  type?: string;
  enum?: Json[];
  properties?: Record<string, SchemaNode>;
  required?: string[];
  additionalProperties?: boolean;
  items?: SchemaNode;
  minItems?: number;
  maxItems?: number;
  minimum?: number;
  minLength?: number;
  [key: string]: Json;
}

function typeOf(value: Json): string {
  if (value === null) return "null";
  if (Array.isArray(value)) return "array";
  return typeof value;
}

export function validateAgainstSchema(schema: SchemaNode, value: Json, path = "$"): string[] {
  const errors: string[] = [];

  if (schema.type !== undefined) {
    const actual = typeOf(value);
    const expected = schema.type;
    const matches =
      expected === actual ||
      (expected === "integer" && actual === "number" && Number.isInteger(value as number)) ||
      (expected === "number" && actual === "number");
    if (!matches) {
      errors.push(`${path}: expected ${expected}, got ${actual}`);
      return errors;
    }
  }

  if (schema.enum !== undefined && !schema.enum.some((v) => v === value)) {
    errors.push(`${path}: value ${JSON.stringify(value)} not in ${JSON.stringify(schema.enum)}`);
  }

  if (typeOf(value) === "number") {
    const n = value as number;
    if (!Number.isFinite(n)) errors.push(`${path}: number must be finite`);
    if (schema.minimum !== undefined && n < schema.minimum) {
      errors.push(`${path}: ${n} below minimum ${schema.minimum}`);
    }
  }

  if (typeOf(value) === "string" && schema.minLength !== undefined) {
    if ((value as string).length < schema.minLength) {
      errors.push(`${path}: string shorter than ${schema.minLength}`);
    }
  }

  if (typeOf(value) === "array") {
    const arr = value as Json[];
    if (schema.minItems !== undefined && arr.length < schema.minItems) {
      errors.push(`${path}: fewer than ${schema.minItems} items`);
    }
    if (schema.maxItems !== undefined && arr.length > schema.maxItems) {
      errors.push(`${path}: more than ${schema.maxItems} items`);
    }
    if (schema.items) {
      arr.forEach((item, i) => {
        errors.push(...validateAgainstSchema(schema.items as SchemaNode, item, `${path}[${i}]`));
      });
    }
  }

  if (typeOf(value) === "object") {
    const obj = value as Record<string, Json>;
    const props = schema.properties ?? {};
    for (const name of schema.required ?? []) {
      if (!(name in obj)) errors.push(`${path}: missing required property '${name}'`);
    }
    for (const [name, child] of Object.entries(obj)) {
      const childSchema = props[name];
      if (childSchema) {
        errors.push(...validateAgainstSchema(childSchema, child, `${path}.${name}`));
      } else if (schema.additionalProperties === false) {
        errors.push(`${path}: unexpected property '${name}'`);
      }
    }
  }

  return errors;
}
