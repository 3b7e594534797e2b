Node* in1 = in(1);
Node* in2 = in(2);
int op1 = in1->Opcode();
int op2 = in2->Opcode();
if (op1 == Op_SubL) {
  // Convert "(a-b)+(c-a)" into "(c-b)"
  if (op2 == Op_SubL && in1->in(1) == in2->in(2)) {
    return new SubLNode(in2->in(1), in1->in(2));
  }
}
